//! Lifetime-ruin strategy π₀ and the ruin probability under the restriction `0 ≤ π ≤ π₀`.

use crate::dual::Side;
use crate::error::{Error, Result};
use crate::hjb::{CandidateFunction, Jet};
use crate::params::{DerivedConstants, ModelParams};

/// `((μ − r)/σ²)(c/r − w)/(q − 1)`: optimal when minimising the probability of lifetime ruin.
pub fn pi_zero(params: &ModelParams, consts: &DerivedConstants, w: f64) -> Result<f64> {
    let safe = params.safe_level();
    if w > safe {
        return Err(Error::Domain {
            what: "w",
            value: w,
            lo: f64::NEG_INFINITY,
            hi: safe,
        });
    }
    Ok(consts.merton_ratio * (safe - w) / (consts.q - 1.0))
}

/// ψ₀ on `(−∞, c/r]`, with no lower cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestrictedValue {
    pub params: ModelParams,
    pub consts: DerivedConstants,
}

impl RestrictedValue {
    pub fn new(params: ModelParams) -> Result<Self> {
        let params = params.validate()?;
        let consts = DerivedConstants::new(&params)?;
        Ok(Self { params, consts })
    }

    fn check(&self, w: f64) -> Result<()> {
        let safe = self.params.safe_level();
        if w <= safe && !w.is_nan() {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "w",
                value: w,
                lo: f64::NEG_INFINITY,
                hi: safe,
            })
        }
    }

    pub fn psi_restricted(&self, w: f64) -> Result<f64> {
        self.check(w)?;
        Ok(self.jet_unchecked(w, Side::Right).value)
    }

    pub fn pi_zero(&self, w: f64) -> Result<f64> {
        pi_zero(&self.params, &self.consts, w)
    }

    fn jet_unchecked(&self, w: f64, side: Side) -> Jet {
        let k = self.params.cutoff_value();
        let (q, a) = (self.consts.q, self.consts.alpha);
        let rc = self.params.r / self.params.c;
        let x = (1.0 - rc * w).max(0.0);
        if w < 0.0 || (w == 0.0 && side == Side::Left) {
            let t = x.powf(-a);
            Jet {
                value: k * (1.0 - q / (q + a) * t),
                first: -k * q * a / (q + a) * rc * t / x,
                second: -k * q * a * (a + 1.0) / (q + a) * rc * rc * t / (x * x),
            }
        } else {
            let c = k * a / (q + a);
            Jet {
                value: c * x.powf(q),
                first: -c * q * rc * x.powf(q - 1.0),
                second: c * q * (q - 1.0) * rc * rc * x.powf(q - 2.0),
            }
        }
    }
}

impl CandidateFunction for RestrictedValue {
    fn jet(&self, w: f64, side: Side) -> Result<Jet> {
        self.check(w)?;
        Ok(self.jet_unchecked(w, side))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hjb::HjbOperator;

    #[test]
    fn reference_values() {
        let v = RestrictedValue::new(ModelParams::reference(0.02)).unwrap();
        assert_eq!(v.psi_restricted(25.0).unwrap(), 0.0);
        assert!((v.psi_restricted(0.0).unwrap() - 0.10461977945516428).abs() < 1e-13);
        assert!((v.psi_restricted(-10.0).unwrap() - 0.15799160586383397).abs() < 1e-13);
        assert!((v.psi_restricted(-1e12).unwrap() - 2.0 / 3.0).abs() < 1e-3);
        assert!(v.psi_restricted(25.1).is_err());
        assert_eq!(v.pi_zero(25.0).unwrap(), 0.0);
        assert!((v.pi_zero(0.0).unwrap() - 42.153516540862679).abs() < 1e-10);
    }

    #[test]
    fn c1_at_zero() {
        let v = RestrictedValue::new(ModelParams::reference(0.02)).unwrap();
        let l = v.jet(0.0, Side::Left).unwrap();
        let r = v.jet(0.0, Side::Right).unwrap();
        assert!((l.value - r.value).abs() < 1e-15);
        assert!((l.first - r.first).abs() <= 1e-13 * r.first.abs());
    }

    #[test]
    fn solves_the_hjb_under_pi_zero() {
        let p = ModelParams::reference(0.02);
        let v = RestrictedValue::new(p).unwrap();
        let op = HjbOperator::parisian(&p);
        for w in [-500.0, -10.0, -0.1, 0.1, 5.0, 20.0] {
            let pi = v.pi_zero(w).unwrap();
            let r = op.residual_with_control(w, Side::Right, &v, pi).unwrap();
            assert!(r.abs() < 1e-13, "w = {w}: {r}");
        }
    }
}
