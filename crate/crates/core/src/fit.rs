//! Lorentzian line fits.

use nalgebra::{Matrix3, Vector3};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzFit {
    pub center: f64,
    pub fwhm: f64,
    pub peak: f64,
    /// Coefficient of determination of the fitted curve against the data.
    pub r_squared: f64,
}

impl LorentzFit {
    pub fn eval(&self, x: f64) -> f64 {
        let h = self.fwhm / 2.0;
        self.peak * h * h / ((x - self.center) * (x - self.center) + h * h)
    }
}

/// Fits `peak (w/2)^2 / ((x - center)^2 + (w/2)^2)` to the samples that
/// exceed `floor` times the largest sample. The fit is linear in `1/y`,
/// with rows weighted by `y^2` so that residuals are measured in `y`.
pub fn fit_lorentzian(x: &[f64], y: &[f64], floor: f64) -> Result<LorentzFit> {
    if x.len() != y.len() {
        return Err(invalid("samples", "x and y lengths differ"));
    }
    let top = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(top > 0.0) {
        return Err(invalid("samples", "no positive samples"));
    }
    // Centre and scale x for conditioning.
    let used = || {
        x.iter()
            .zip(y)
            .filter(move |(_, &v)| v > floor * top && v.is_finite())
    };
    let n = used().count();
    if n < 4 {
        return Err(invalid(
            "samples",
            "fewer than four samples above the floor",
        ));
    }
    let x0 = used().map(|(u, _)| u).sum::<f64>() / n as f64;
    let s = used()
        .map(|(u, _)| (u - x0).abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);

    let mut ata = Matrix3::zeros();
    let mut atb = Vector3::zeros();
    for (&u, &v) in used() {
        let t = (u - x0) / s;
        let w = v * v;
        let row = Vector3::new(w, w * t, w * t * t);
        ata += row * row.transpose();
        atb += row * (w / v);
    }
    let p = ata
        .lu()
        .solve(&atb)
        .ok_or(invalid("samples", "degenerate fit"))?;
    if !(p[2] > 0.0) {
        return Err(invalid("samples", "data are not peaked"));
    }
    let tc = -p[1] / (2.0 * p[2]);
    let q_min = p[0] - p[1] * p[1] / (4.0 * p[2]);
    if !(q_min > 0.0) {
        return Err(invalid("samples", "data are not peaked"));
    }
    let fit = LorentzFit {
        center: x0 + s * tc,
        fwhm: 2.0 * s * libm::sqrt(q_min / p[2]),
        peak: 1.0 / q_min,
        r_squared: 0.0,
    };
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for (&u, &v) in x.iter().zip(y) {
        ss_res += (v - fit.eval(u)) * (v - fit.eval(u));
        ss_tot += (v - mean) * (v - mean);
    }
    Ok(LorentzFit {
        r_squared: 1.0 - ss_res / ss_tot,
        ..fit
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn recovers_exact_lorentzian() {
        let truth = LorentzFit {
            center: 2.99e6,
            fwhm: 0.24e6,
            peak: 0.8,
            r_squared: 1.0,
        };
        let x: Vec<f64> = (0..61).map(|i| 2.4e6 + 2e4 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&u| truth.eval(u)).collect();
        let f = fit_lorentzian(&x, &y, 0.0).unwrap();
        assert!((f.center - truth.center).abs() < 1e-6 * truth.fwhm);
        assert!((f.fwhm / truth.fwhm - 1.0).abs() < 1e-9);
        assert!((f.peak / truth.peak - 1.0).abs() < 1e-9);
        assert!(f.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn flat_data_is_rejected() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert!(fit_lorentzian(&x, &[1.0; 5], 0.0).is_err());
        assert!(fit_lorentzian(&x, &[0.0; 5], 0.0).is_err());
    }
}
