//! Shared DSP primitives: validated complex sequences, DFT helpers, circular
//! convolution, and circulant linear solves.
//!
//! The sweep configurations only ever use power-of-two lengths, which keeps
//! every transform on the fast radix paths, but the routines themselves accept
//! any nonempty length. The DFT convention is the unnormalized forward
//! transform with a `1/N` inverse, so Parseval reads
//! `sum |x[n]|^2 = (1/N) * sum |X[k]|^2`.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;
use std::fmt;
use std::ops::Index;

/// Relative magnitude (against the largest spectral bin) below which a
/// circulant spectrum bin is treated as numerically singular.
pub const SINGULARITY_TOLERANCE: f64 = 1e-9;

// ── Errors ──────────────────────────────────────────────────────────────────

/// Errors from sequence validation and circulant operations.
#[derive(Debug, Clone, PartialEq)]
pub enum DspError {
    /// A sequence was constructed with no samples.
    Empty,
    /// A sample had a non-finite real or imaginary part.
    NonFinite { index: usize },
    /// Two sequences that must share a length did not.
    LengthMismatch { left: usize, right: usize },
    /// A spectral bin is too close to zero to divide by safely.
    SingularSpectrum { bin: usize, magnitude: f64 },
}

impl fmt::Display for DspError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DspError::Empty => write!(f, "sequence must contain at least one sample"),
            DspError::NonFinite { index } => {
                write!(f, "non-finite sample at index {index}")
            }
            DspError::LengthMismatch { left, right } => {
                write!(f, "sequence length mismatch: {left} vs {right}")
            }
            DspError::SingularSpectrum { bin, magnitude } => write!(
                f,
                "circulant spectrum is numerically singular at bin {bin} (|S| = {magnitude:.3e})"
            ),
        }
    }
}

impl std::error::Error for DspError {}

// ── Complex sequences ───────────────────────────────────────────────────────

/// A finite, nonempty sequence of complex samples.
///
/// Construction validates that every sample is finite, which lets the rest of
/// the pipeline assume well-formed data.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSeq {
    values: Vec<Complex64>,
}

impl ComplexSeq {
    /// Validates and wraps a sample vector.
    pub fn new(values: Vec<Complex64>) -> Result<Self, DspError> {
        if values.is_empty() {
            return Err(DspError::Empty);
        }
        for (index, v) in values.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(DspError::NonFinite { index });
            }
        }
        Ok(Self { values })
    }

    /// An all-zero sequence of length `len` (`len` must be at least 1).
    pub fn zeros(len: usize) -> Self {
        debug_assert!(len >= 1, "ComplexSeq::zeros requires len >= 1");
        Self {
            values: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.values.iter()
    }

    /// Total energy `sum |x[n]|^2`.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.values
    }
}

impl Index<usize> for ComplexSeq {
    type Output = Complex64;

    fn index(&self, index: usize) -> &Complex64 {
        &self.values[index]
    }
}

impl<'a> IntoIterator for &'a ComplexSeq {
    type Item = &'a Complex64;
    type IntoIter = std::slice::Iter<'a, Complex64>;

    fn into_iter(self) -> Self::IntoIter {
        self.values.iter()
    }
}

// ── DFT helpers ─────────────────────────────────────────────────────────────

thread_local! {
    // One planner per thread; it caches plans per length, so repeated
    // transforms of the same size cost one hash lookup.
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn transform_in_place(buf: &mut [Complex64], inverse: bool) {
    PLANNER.with(|planner| {
        let fft = {
            let mut p = planner.borrow_mut();
            if inverse {
                p.plan_fft_inverse(buf.len())
            } else {
                p.plan_fft_forward(buf.len())
            }
        };
        fft.process(buf);
    });
}

/// Unnormalized forward DFT: `X[k] = sum_n x[n] exp(-j 2 pi k n / N)`.
pub fn dft(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    transform_in_place(&mut buf, false);
    buf
}

/// Inverse DFT with `1/N` normalization, so `idft(dft(x)) == x`.
pub fn idft(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    transform_in_place(&mut buf, true);
    let scale = 1.0 / buf.len() as f64;
    for v in &mut buf {
        *v *= scale;
    }
    buf
}

// ── Circulant systems ───────────────────────────────────────────────────────

/// A circulant matrix described by its first column, with the eigenvalue
/// spectrum (the DFT of that column) cached for repeated solves.
///
/// Multiplying by the matrix is circular convolution with the first column;
/// solving against it divides bin-wise by the spectrum.
#[derive(Debug, Clone)]
pub struct CirculantSpec {
    first_column: ComplexSeq,
    spectrum: Vec<Complex64>,
}

impl CirculantSpec {
    pub fn new(first_column: ComplexSeq) -> Self {
        let spectrum = dft(first_column.as_slice());
        Self {
            first_column,
            spectrum,
        }
    }

    pub fn len(&self) -> usize {
        self.first_column.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first_column(&self) -> &ComplexSeq {
        &self.first_column
    }

    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    /// Largest spectral magnitude; the reference point for the singularity
    /// tolerance.
    pub fn max_spectrum_magnitude(&self) -> f64 {
        self.spectrum.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    /// Checks every spectral bin against the relative singularity tolerance,
    /// reporting the first offending bin.
    pub fn check_invertible(&self) -> Result<(), DspError> {
        let floor = SINGULARITY_TOLERANCE * self.max_spectrum_magnitude();
        for (bin, s) in self.spectrum.iter().enumerate() {
            let magnitude = s.norm();
            if magnitude < floor {
                return Err(DspError::SingularSpectrum { bin, magnitude });
            }
        }
        Ok(())
    }
}

/// Circular convolution of two equal-length sequences, computed spectrally:
/// `c[l] = sum_n a[n] * b[(l - n) mod N]`.
pub fn circ_conv(a: &ComplexSeq, b: &ComplexSeq) -> Result<ComplexSeq, DspError> {
    if a.len() != b.len() {
        return Err(DspError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let mut fa = a.as_slice().to_vec();
    let mut fb = b.as_slice().to_vec();
    transform_in_place(&mut fa, false);
    transform_in_place(&mut fb, false);
    for (va, vb) in fa.iter_mut().zip(fb.iter()) {
        *va *= vb;
    }
    let out = idft(&fa);
    ComplexSeq::new(out)
}

/// Solves the circulant system `S y = r` by bin-wise spectral division.
///
/// Fails with [`DspError::SingularSpectrum`] if any bin of `S` falls under
/// the relative tolerance, and with a length mismatch if `r` does not match
/// the circulant size.
pub fn circulant_solve(s: &CirculantSpec, r: &ComplexSeq) -> Result<ComplexSeq, DspError> {
    if s.len() != r.len() {
        return Err(DspError::LengthMismatch {
            left: s.len(),
            right: r.len(),
        });
    }
    s.check_invertible()?;
    let mut spectrum_r = r.as_slice().to_vec();
    transform_in_place(&mut spectrum_r, false);
    for (vr, vs) in spectrum_r.iter_mut().zip(s.spectrum().iter()) {
        *vr /= vs;
    }
    let out = idft(&spectrum_r);
    ComplexSeq::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn seq(values: &[(f64, f64)]) -> ComplexSeq {
        ComplexSeq::new(values.iter().map(|&(re, im)| c(re, im)).collect()).unwrap()
    }

    fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    // 1. Construction rejects empty and non-finite inputs.
    #[test]
    fn rejects_invalid_sequences() {
        assert_eq!(ComplexSeq::new(vec![]), Err(DspError::Empty));
        let bad = vec![c(1.0, 0.0), c(f64::NAN, 0.0)];
        assert_eq!(ComplexSeq::new(bad), Err(DspError::NonFinite { index: 1 }));
        let bad = vec![c(0.0, f64::INFINITY)];
        assert_eq!(ComplexSeq::new(bad), Err(DspError::NonFinite { index: 0 }));
    }

    // 2. Convolving with a shifted delta rotates the sequence.
    #[test]
    fn delta_convolution_rotates() {
        let a = seq(&[(1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (4.0, 0.0)]);
        let delta2 = seq(&[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0), (0.0, 0.0)]);
        let out = circ_conv(&a, &delta2).unwrap();
        let expected = [c(3.0, 0.0), c(4.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)];
        assert!(
            max_abs_diff(out.as_slice(), &expected) < TOL,
            "delta shift mismatch: {:?}",
            out
        );
    }

    // 3. Length mismatch is an error, not a panic.
    #[test]
    fn convolution_length_mismatch() {
        let a = ComplexSeq::zeros(4);
        let b = ComplexSeq::zeros(8);
        assert_eq!(
            circ_conv(&a, &b),
            Err(DspError::LengthMismatch { left: 4, right: 8 })
        );
    }

    // 4. Solving after convolving recovers the input exactly (well-conditioned
    //    generator).
    #[test]
    fn solve_inverts_convolution() {
        let generator = seq(&[(1.0, 0.2), (0.4, -0.3), (-0.2, 0.5), (0.1, 0.9)]);
        let x = seq(&[(0.3, -1.0), (2.0, 0.7), (-0.5, 0.25), (1.5, -0.6)]);
        let spec = CirculantSpec::new(generator.clone());
        let r = circ_conv(&generator, &x).unwrap();
        let y = circulant_solve(&spec, &r).unwrap();
        assert!(
            max_abs_diff(y.as_slice(), x.as_slice()) < 1e-12,
            "round trip error {:?}",
            max_abs_diff(y.as_slice(), x.as_slice())
        );
    }

    // 5. A generator with a zero spectral bin is reported singular with the
    //    offending bin index. The all-ones column has spectrum [N, 0, 0, ...],
    //    so bin 1 is the first to trip.
    #[test]
    fn singular_spectrum_reports_bin() {
        let ones = seq(&[(1.0, 0.0), (1.0, 0.0), (1.0, 0.0), (1.0, 0.0)]);
        let spec = CirculantSpec::new(ones);
        let r = ComplexSeq::zeros(4);
        match circulant_solve(&spec, &r) {
            Err(DspError::SingularSpectrum { bin, .. }) => assert_eq!(bin, 1),
            other => panic!("expected singular spectrum, got {:?}", other),
        }
    }

    // 6. DFT round trip and Parseval with the 1/N-inverse convention.
    #[test]
    fn dft_roundtrip_and_parseval() {
        let x = seq(&[
            (0.7, -0.1),
            (1.3, 0.4),
            (-0.2, 0.9),
            (0.05, -1.4),
            (2.0, 0.0),
            (-0.8, 0.3),
            (0.6, 0.6),
            (-1.1, -0.5),
        ]);
        let spectrum = dft(x.as_slice());
        let back = idft(&spectrum);
        assert!(max_abs_diff(&back, x.as_slice()) < TOL);

        let time_energy = x.energy();
        let freq_energy: f64 =
            spectrum.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64;
        assert!(
            ((time_energy - freq_energy) / time_energy).abs() < TOL,
            "Parseval violated: {time_energy} vs {freq_energy}"
        );
    }

    // 7. Convolution is linear in its first argument.
    #[test]
    fn convolution_linearity() {
        let a = seq(&[(0.2, 0.1), (-0.4, 0.9), (1.1, -0.3), (0.6, 0.0)]);
        let b = seq(&[(1.0, -0.2), (0.3, 0.3), (-0.7, 0.1), (0.2, 0.8)]);
        let g = seq(&[(0.5, 0.5), (1.5, -0.5), (0.0, 1.0), (-1.0, 0.0)]);
        let scale = c(0.7, -1.3);

        let combined = ComplexSeq::new(
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| x + scale * y)
                .collect(),
        )
        .unwrap();
        let lhs = circ_conv(&combined, &g).unwrap();
        let ca = circ_conv(&a, &g).unwrap();
        let cb = circ_conv(&b, &g).unwrap();
        let rhs: Vec<Complex64> = ca
            .iter()
            .zip(cb.iter())
            .map(|(x, y)| x + scale * y)
            .collect();
        assert!(max_abs_diff(lhs.as_slice(), &rhs) < TOL);
    }
}
