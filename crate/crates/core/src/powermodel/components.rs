use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Hardware parameters a sub-component may scale with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ParamKey {
    N,
    B,
    Q,
    Se,
    Ld,
    St,
}

impl ParamKey {
    pub const ALL: [ParamKey; 6] = [ParamKey::N, ParamKey::B, ParamKey::Q, ParamKey::Se, ParamKey::Ld, ParamKey::St];
}

/// Values for every scaling parameter (`_ref` or `_act` rows).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamValues {
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "Se")]
    pub se: f64,
    #[serde(rename = "Ld")]
    pub ld: f64,
    #[serde(rename = "St")]
    pub st: f64,
}

impl ParamValues {
    pub fn get(&self, key: ParamKey) -> f64 {
        match key {
            ParamKey::N => self.n,
            ParamKey::B => self.b,
            ParamKey::Q => self.q,
            ParamKey::Se => self.se,
            ParamKey::Ld => self.ld,
            ParamKey::St => self.st,
        }
    }

    pub fn set(&mut self, key: ParamKey, value: f64) {
        match key {
            ParamKey::N => self.n = value,
            ParamKey::B => self.b = value,
            ParamKey::Q => self.q = value,
            ParamKey::Se => self.se = value,
            ParamKey::Ld => self.ld = value,
            ParamKey::St => self.st = value,
        }
    }
}

/// One RF or BBU sub-component with its reference power and scaling law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubComponentSpec {
    pub name: String,
    pub p_ref_w: f64,
    #[serde(default)]
    pub scaling_exponents: BTreeMap<ParamKey, f64>,
}

impl SubComponentSpec {
    pub fn new(name: &str, p_ref_w: f64, exps: &[(ParamKey, f64)]) -> Self {
        Self {
            name: name.to_string(),
            p_ref_w,
            scaling_exponents: exps.iter().copied().collect(),
        }
    }

    pub fn exponent(&self, key: ParamKey) -> f64 {
        self.scaling_exponents.get(&key).copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p_ref_w >= 0.0) || !self.p_ref_w.is_finite() {
            return Err(invalid("p_ref_w", format!("{}: must be finite and nonnegative, got {}", self.name, self.p_ref_w)));
        }
        if let Some((k, v)) = self.scaling_exponents.iter().find(|(_, v)| !v.is_finite()) {
            return Err(invalid("scaling_exponents", format!("{}: exponent for {k:?} is {v}", self.name)));
        }
        Ok(())
    }
}

/// `p_ref · ∏_x (act_x / ref_x)^{s_x}`.
pub fn component_power(spec: &SubComponentSpec, act: &ParamValues, reference: &ParamValues) -> Result<f64> {
    let mut p = spec.p_ref_w;
    for key in ParamKey::ALL {
        let r = reference.get(key);
        if !(r > 0.0) {
            return Err(invalid("ref_values", format!("{key:?} reference must be positive, got {r}")));
        }
        let s = spec.exponent(key);
        if s != 0.0 {
            p *= (act.get(key) / r).powf(s);
        }
    }
    Ok(p)
}

/// Per-UBS hardware description: component tables, operating point, losses
/// and sleep depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BsPowerConfig {
    pub rf_components: Vec<SubComponentSpec>,
    pub bbu_components: Vec<SubComponentSpec>,
    pub ref_values: ParamValues,
    pub act_values: ParamValues,
    pub sectors: f64,
    pub loss_ms: f64,
    pub loss_dc: f64,
    pub loss_co: f64,
    pub sleep_scale: f64,
}

impl BsPowerConfig {
    pub fn validate(&self) -> Result<()> {
        for c in self.rf_components.iter().chain(&self.bbu_components) {
            c.validate()?;
        }
        for key in ParamKey::ALL {
            let r = self.ref_values.get(key);
            if !(r > 0.0) || !r.is_finite() {
                return Err(invalid("ref_values", format!("{key:?} must be positive, got {r}")));
            }
            let a = self.act_values.get(key);
            if !(a >= 0.0) || !a.is_finite() {
                return Err(invalid("act_values", format!("{key:?} must be nonnegative, got {a}")));
            }
        }
        if !(self.sectors > 0.0) {
            return Err(invalid("sectors", format!("must be positive, got {}", self.sectors)));
        }
        for (name, v) in [("loss_ms", self.loss_ms), ("loss_dc", self.loss_dc), ("loss_co", self.loss_co)] {
            if !(0.0..1.0).contains(&v) {
                return Err(invalid(name, format!("must lie in [0, 1), got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.sleep_scale) {
            return Err(invalid("sleep_scale", format!("must lie in [0, 1], got {}", self.sleep_scale)));
        }
        Ok(())
    }

    /// Extra check required by the affine reduction: every load exponent is
    /// either 0 or exactly 1.
    pub fn validate_affine(&self) -> Result<()> {
        self.validate()?;
        for c in self.rf_components.iter().chain(&self.bbu_components) {
            let s = c.exponent(ParamKey::Ld);
            if s != 0.0 && s != 1.0 {
                return Err(Error::PowerConfig(format!(
                    "component {} has load exponent {s}; the affine power form needs 0 or 1",
                    c.name
                )));
            }
        }
        Ok(())
    }

    /// `(1−σ_MS)(1−σ_DC)(1−σ_CO)`.
    pub fn loss_divisor(&self) -> f64 {
        (1.0 - self.loss_ms) * (1.0 - self.loss_dc) * (1.0 - self.loss_co)
    }

    fn at_load(&self, load_fraction: f64) -> ParamValues {
        let mut act = self.act_values;
        act.ld = load_fraction * self.ref_values.ld;
        act
    }

    fn sum(&self, comps: &[SubComponentSpec], load_fraction: f64) -> Result<f64> {
        let act = self.at_load(load_fraction);
        comps.iter().map(|c| component_power(c, &act, &self.ref_values)).sum()
    }

    /// RF power at the given load fraction, before sectors and losses.
    pub fn rf_power(&self, load_fraction: f64) -> Result<f64> {
        self.sum(&self.rf_components, load_fraction)
    }

    /// BBU power at the given load fraction, before sectors and losses.
    pub fn bbu_power(&self, load_fraction: f64) -> Result<f64> {
        self.sum(&self.bbu_components, load_fraction)
    }
}

/// `N^s (P^RF + P^BBU) / ((1−σ_MS)(1−σ_DC)(1−σ_CO))` with `Ld_act = load·Ld_ref`.
pub fn ubs_power(cfg: &BsPowerConfig, load_fraction: f64) -> Result<f64> {
    if !(load_fraction >= 0.0) {
        return Err(invalid("load_fraction", format!("must be nonnegative, got {load_fraction}")));
    }
    Ok(cfg.sectors * (cfg.rf_power(load_fraction)? + cfg.bbu_power(load_fraction)?) / cfg.loss_divisor())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_values() -> ParamValues {
        ParamValues { n: 1.0, b: 1.0, q: 1.0, se: 1.0, ld: 1.0, st: 1.0 }
    }

    fn bare(rf: Vec<SubComponentSpec>, bbu: Vec<SubComponentSpec>) -> BsPowerConfig {
        BsPowerConfig {
            rf_components: rf,
            bbu_components: bbu,
            ref_values: unit_values(),
            act_values: unit_values(),
            sectors: 1.0,
            loss_ms: 0.0,
            loss_dc: 0.0,
            loss_co: 0.0,
            sleep_scale: 0.1,
        }
    }

    #[test]
    fn identity_scaling() {
        let s = SubComponentSpec::new("x", 3.5, &[(ParamKey::N, 1.0), (ParamKey::B, 0.7)]);
        let v = ParamValues { n: 5.0, b: 2e7, q: 24.0, se: 6.0, ld: 1.0, st: 1.0 };
        assert_eq!(component_power(&s, &v, &v).unwrap(), 3.5);
    }

    #[test]
    fn zero_load_with_unit_exponent() {
        let s = SubComponentSpec::new("x", 3.5, &[(ParamKey::Ld, 1.0)]);
        let mut act = unit_values();
        act.ld = 0.0;
        assert_eq!(component_power(&s, &act, &unit_values()).unwrap(), 0.0);
    }

    #[test]
    fn square_root_bandwidth() {
        let s = SubComponentSpec::new("x", 1.0, &[(ParamKey::B, 0.5)]);
        let mut act = unit_values();
        act.b = 4.0;
        assert!((component_power(&s, &act, &unit_values()).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_reference_rejected() {
        let s = SubComponentSpec::new("x", 1.0, &[]);
        let mut r = unit_values();
        r.q = 0.0;
        assert!(component_power(&s, &unit_values(), &r).is_err());
    }

    #[test]
    fn single_rf_component() {
        let cfg = bare(vec![SubComponentSpec::new("rf", 10.0, &[])], vec![]);
        assert_eq!(ubs_power(&cfg, 0.3).unwrap(), 10.0);
    }

    #[test]
    fn loss_divisor_table_values() {
        let mut cfg = bare(vec![], vec![]);
        cfg.loss_ms = 0.1;
        cfg.loss_dc = 0.05;
        assert!((cfg.loss_divisor() - 0.855).abs() < 1e-15);
    }

    #[test]
    fn monotone_in_load() {
        let cfg = bare(
            vec![SubComponentSpec::new("rf", 2.0, &[(ParamKey::N, 1.0)])],
            vec![
                SubComponentSpec::new("a", 1.0, &[(ParamKey::Ld, 1.0)]),
                SubComponentSpec::new("b", 1.0, &[(ParamKey::Ld, 0.5)]),
            ],
        );
        let mut prev = ubs_power(&cfg, 0.0).unwrap();
        for i in 1..=50 {
            let p = ubs_power(&cfg, i as f64 * 0.05).unwrap();
            assert!(p >= prev);
            prev = p;
        }
        assert!(cfg.validate().is_ok());
        assert!(matches!(cfg.validate_affine(), Err(Error::PowerConfig(_))));
    }

    #[test]
    fn invalid_losses_rejected() {
        let mut cfg = bare(vec![], vec![]);
        cfg.loss_co = 1.0;
        assert!(cfg.validate().is_err());
        cfg.loss_co = 0.0;
        cfg.sleep_scale = 1.5;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn exponent_map_round_trips() {
        let s = SubComponentSpec::new("x", 1.0, &[(ParamKey::Se, 1.0), (ParamKey::Ld, 1.0)]);
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"Se\":1.0"));
        assert_eq!(serde_json::from_str::<SubComponentSpec>(&text).unwrap(), s);
    }
}
