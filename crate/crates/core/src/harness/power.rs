//! Per-trial user powers and the near-far step-size rule.

use rand::Rng;

use crate::error::{Error, Result};

/// Linear near-far ratio from dB.
pub fn omega_linear(omega_db: f64) -> f64 {
    10f64.powf(omega_db / 10.0)
}

/// Powers for `k` users. User 0 is the desired user with unit power. With
/// `omega_db == 0` every user has unit power; otherwise each interferer is
/// drawn uniformly on `(1, Omega]` in linear power.
pub fn assign_powers<R: Rng + ?Sized>(k: usize, omega_db: f64, rng: &mut R) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::InvalidParameter("need at least one user".into()));
    }
    if !(omega_db >= 0.0) {
        return Err(Error::InvalidParameter(format!("near-far ratio must be >= 0 dB, got {omega_db}")));
    }
    let mut powers = vec![1.0; k];
    if omega_db > 0.0 {
        let omega = omega_linear(omega_db);
        for p in powers.iter_mut().skip(1) {
            // gen::<f64>() is in [0, 1); 1 - u is in (0, 1]
            let u: f64 = rng.gen();
            *p = 1.0 + (omega - 1.0) * (1.0 - u);
        }
    }
    Ok(powers)
}

/// Step size: an explicit value when given, otherwise `mu_base / Omega`.
pub fn step_size_rule(mu_base: f64, omega_db: f64, explicit: Option<f64>) -> Result<f64> {
    let mu = match explicit {
        Some(mu) => mu,
        None => {
            if !(omega_db >= 0.0) {
                return Err(Error::InvalidParameter(format!("near-far ratio must be >= 0 dB, got {omega_db}")));
            }
            mu_base / omega_linear(omega_db)
        }
    };
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter(format!("step size must be positive, got {mu}")));
    }
    Ok(mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

    #[test]
    fn equal_power_mode() {
        let mut rng = stream(1, 0, Purpose::Powers);
        assert_eq!(assign_powers(5, 0.0, &mut rng).unwrap(), vec![1.0; 5]);
    }

    #[test]
    fn near_far_interferers_lie_above_desired() {
        let mut rng = stream(1, 0, Purpose::Powers);
        let p = assign_powers(20, 10.0, &mut rng).unwrap();
        assert_eq!(p.len(), 20);
        assert_eq!(p[0], 1.0);
        assert!(p[1..].iter().all(|&x| x > 1.0 && x <= 10.0 + 1e-12));
    }

    #[test]
    fn near_far_mean_is_midpoint() {
        let mut rng = stream(2, 0, Purpose::Powers);
        let mut sum = 0.0;
        let draws = 100_000;
        for _ in 0..draws / 10 {
            let p = assign_powers(11, 10.0, &mut rng).unwrap();
            sum += p[1..].iter().sum::<f64>();
        }
        let mean = sum / draws as f64;
        // uniform on (1, 10]: mean 5.5, sd 2.6 -> standard error ~0.008
        assert!((mean - 5.5).abs() < 0.04, "mean={mean}");
    }

    #[test]
    fn invalid_inputs() {
        let mut rng = stream(1, 0, Purpose::Powers);
        assert!(assign_powers(3, -1.0, &mut rng).is_err());
        assert!(assign_powers(0, 0.0, &mut rng).is_err());
        assert!(step_size_rule(1e-4, 0.0, Some(0.0)).is_err());
        assert!(step_size_rule(1e-4, 0.0, Some(-1e-3)).is_err());
    }

    #[test]
    fn step_sizes() {
        assert!((step_size_rule(1e-4, 10.0, None).unwrap() - 1e-5).abs() < 1e-18);
        assert_eq!(step_size_rule(1e-4, 0.0, None).unwrap(), 1e-4);
        assert_eq!(step_size_rule(1e-4, 0.0, Some(0.0013)).unwrap(), 0.0013);
    }
}
