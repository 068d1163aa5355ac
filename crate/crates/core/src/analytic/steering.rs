use super::AnalyticError;
use crate::scalar::Real;

/// Upper bound on the steering robustness of `d`-preparable assemblages
/// probed with `k` settings.
pub fn sr_bound<F: Real>(k: u32, d: u32) -> Result<F, AnalyticError> {
    if k < 2 || d < 2 {
        return Err(AnalyticError::Domain(format!("need k, d ≥ 2, got k={k}, d={d}")));
    }
    let (kf, df) = (F::from_u32(k).unwrap(), F::from_u32(d).unwrap());
    let one = F::one();
    let two = F::lit(2.0);
    let three = F::lit(3.0);
    let root = ((kf - one) * (df - one) + one).sqrt();
    let num = (kf - one) * df * df + (kf * kf - (three + root) * kf + three) * df
        - (kf - one) * (kf - two);
    let den = df * df + (kf - three) * df + (kf - one) * (kf - two);
    Ok(num / den)
}

/// Steering robustness corresponding to a generalised robustness value.
pub fn sr_from_eta<F: Real>(eta: F) -> Result<F, AnalyticError> {
    if !(eta > F::zero() && eta <= F::one()) {
        return Err(AnalyticError::Domain(format!("eta {eta:?} outside (0, 1]")));
    }
    Ok(F::one() / eta - F::one())
}

/// Certified lower bound on the dimension given an observed steering
/// robustness `sr` with `k` settings.
pub fn dimension_witness<F: Real>(sr: F, k: u32) -> Result<F, AnalyticError> {
    if k < 2 {
        return Err(AnalyticError::Domain(format!("k = {k} must be at least 2")));
    }
    let kf = F::from_u32(k).unwrap();
    let one = F::one();
    let two = F::lit(2.0);
    if !(sr >= F::zero()) {
        return Err(AnalyticError::Domain(format!("steering robustness {sr:?} is negative")));
    }
    if sr >= kf - one {
        return Err(AnalyticError::UnboundedWitness { sr: sr.to_f64().unwrap(), k });
    }
    let disc = (one - F::lit(3.0) * kf * (kf - two)) * sr * sr
        + two * (kf * (kf - two) * (two * kf - one) + one) * sr
        + (kf - one) * (kf - one);
    let num = (one + sr)
        * (two * kf * kf - F::lit(5.0) * kf + F::lit(3.0) + disc.sqrt() - (kf - F::lit(3.0)) * sr);
    let gap = kf - one - sr;
    Ok(num / (two * gap * gap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::degree3_bound;

    #[test]
    fn table_cells() {
        let cases = [((2, 2), 0.1716), ((4, 4), 0.7463), ((5, 6), 1.2087), ((3, 4), 0.5695), ((4, 3), 0.5695)];
        for ((k, d), want) in cases {
            let got: f64 = sr_bound(k, d).unwrap();
            assert!((got - want).abs() < 5e-5, "({k},{d}) {got}");
        }
    }

    #[test]
    fn symmetric_and_consistent() {
        for k in 2..9 {
            for d in 2..9 {
                let a: f64 = sr_bound(k, d).unwrap();
                let b: f64 = sr_bound(d, k).unwrap();
                assert!((a - b).abs() < 1e-12);
                let via = sr_from_eta(degree3_bound::<f64>(k, d).unwrap().value).unwrap();
                assert!((a - via).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn witness_examples() {
        for k in 2..9 {
            assert!((dimension_witness(0.0f64, k).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!((dimension_witness(0.1716f64, 2).unwrap() - 2.0).abs() < 1e-3);
        assert!((dimension_witness(0.4432f64, 3).unwrap() - 3.0).abs() < 1e-3);
        assert!(matches!(dimension_witness(2.9f64, 3), Err(AnalyticError::UnboundedWitness { .. })));
        assert!(dimension_witness(-0.1f64, 3).is_err());
    }
}
