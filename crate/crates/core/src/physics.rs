//! Model coefficients, constitutive laws and source pulses of the
//! nondimensionalized three-temperature model.
//!
//! Every temperature-dependent coefficient is a power law
//! `base * multiplier(x) * T^exponent`, where the optional multiplier is a
//! piecewise-constant function of position. That family covers the constant
//! opacities, `sigma0 / T^2`, `300 T^-3`, the `T^-0.5` coupling and the linear
//! heat capacity used by the benchmarks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise-constant multiplier in `x`.
///
/// `values[k]` applies on `[breakpoints[k-1], breakpoints[k])`, with the first
/// and last entries extending to minus and plus infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpatialTable {
    pub breakpoints: Vec<f64>,
    pub values: Vec<f64>,
}

impl SpatialTable {
    pub fn multiplier(&self, x: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&b| b <= x);
        self.values[k]
    }

    fn validate(&self) -> Result<()> {
        if self.values.len() != self.breakpoints.len() + 1 {
            return Err(Error::Config(format!(
                "spatial table needs {} values for {} breakpoints, got {}",
                self.breakpoints.len() + 1,
                self.breakpoints.len(),
                self.values.len()
            )));
        }
        if self.breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "spatial table breakpoints must be strictly increasing".into(),
            ));
        }
        if self.values.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::Config("spatial table multipliers must be positive".into()));
        }
        Ok(())
    }
}

/// `base * multiplier(x) * T^exponent`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientModel {
    pub base: f64,
    #[serde(default)]
    pub exponent: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<SpatialTable>,
}

impl CoefficientModel {
    pub fn constant(value: f64) -> Self {
        Self::power_law(value, 0.0)
    }

    pub fn power_law(base: f64, exponent: f64) -> Self {
        Self {
            base,
            exponent,
            table: None,
        }
    }

    pub fn with_table(mut self, table: SpatialTable) -> Self {
        self.table = Some(table);
        self
    }

    pub fn is_temperature_dependent(&self) -> bool {
        self.exponent != 0.0
    }

    fn scale(&self, x: f64) -> f64 {
        match &self.table {
            Some(t) => self.base * t.multiplier(x),
            None => self.base,
        }
    }

    /// Unchecked evaluation for hot loops; callers guarantee `t > 0`.
    #[inline]
    pub fn eval(&self, x: f64, t: f64) -> f64 {
        if self.exponent == 0.0 {
            self.scale(x)
        } else {
            self.scale(x) * t.powf(self.exponent)
        }
    }

    pub fn try_eval(&self, x: f64, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("temperature must be positive, got {t}")));
        }
        Ok(self.eval(x, t))
    }

    /// `integral_0^t value(x, s) ds`; the energy density of a heat capacity.
    #[inline]
    pub fn integral(&self, x: f64, t: f64) -> f64 {
        let p = self.exponent + 1.0;
        self.scale(x) * t.powf(p) / p
    }

    /// Temperature whose [`Self::integral`] is `e`; `None` unless `e > 0`.
    pub fn integral_inverse(&self, x: f64, e: f64) -> Option<f64> {
        let p = self.exponent + 1.0;
        let t = (e * p / self.scale(x)).powf(1.0 / p);
        (e > 0.0 && t.is_finite()).then_some(t)
    }

    /// Secant slope of [`Self::integral`] between `t_from` and `t_to`.
    ///
    /// Multiplying it by `t_to - t_from` reproduces the exact energy change,
    /// which keeps lagged heat capacities conservative.
    #[inline]
    pub fn secant(&self, x: f64, t_from: f64, t_to: f64) -> f64 {
        if self.exponent == 0.0 {
            return self.scale(x);
        }
        let dt = t_to - t_from;
        if dt.abs() <= 1e-12 * t_from.abs().max(t_to.abs()) {
            return self.eval(x, 0.5 * (t_from + t_to));
        }
        (self.integral(x, t_to) - self.integral(x, t_from)) / dt
    }

    pub fn validate(&self, what: &str) -> Result<()> {
        if !(self.base > 0.0 && self.base.is_finite()) {
            return Err(Error::Config(format!("{what}: base must be positive")));
        }
        if !self.exponent.is_finite() {
            return Err(Error::Config(format!("{what}: exponent must be finite")));
        }
        if let Some(t) = &self.table {
            t.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Species {
    Electron,
    Ion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceTarget {
    Radiation,
    Electron,
    Ion,
}

/// Sign of the exponent in the pulse shape.
///
/// `Gaussian` is the decaying pulse; `AsPrinted` keeps a positive exponent
/// and grows without bound away from the centre.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseShape {
    #[default]
    Gaussian,
    AsPrinted,
}

/// Gaussian energy pulse `rho_bar * C / (sqrt(2 pi) t_w) * exp(-(t - t_c)^2 / (2 t_w^2))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    pub target: SourceTarget,
    pub amplitude: f64,
    pub t_w: f64,
    pub t_c: f64,
    pub rho_bar: f64,
    #[serde(default)]
    pub shape: PulseShape,
}

impl SourceSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_w > 0.0) {
            return Err(Error::Config("source t_w must be positive".into()));
        }
        if !(self.amplitude.is_finite() && self.rho_bar.is_finite() && self.t_c.is_finite()) {
            return Err(Error::Config("source parameters must be finite".into()));
        }
        Ok(())
    }
}

pub fn source_value(spec: &SourceSpec, t: f64) -> f64 {
    let z = (t - spec.t_c) / spec.t_w;
    let sign = match spec.shape {
        PulseShape::Gaussian => -1.0,
        PulseShape::AsPrinted => 1.0,
    };
    spec.rho_bar * spec.amplitude / ((2.0 * std::f64::consts::PI).sqrt() * spec.t_w)
        * (sign * 0.5 * z * z).exp()
}

/// Source rates summed per target at time `t`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SourceRates {
    pub radiation: f64,
    pub electron: f64,
    pub ion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    pub epsilon: f64,
    pub c: f64,
    pub a: f64,
    /// Electron-ion coupling coefficient, a function of `T_e`.
    pub kappa: CoefficientModel,
    /// Electron heat capacity, a function of `T_e`.
    pub cve: CoefficientModel,
    /// Ion heat capacity, a function of `T_i`.
    pub cvi: CoefficientModel,
    #[serde(default)]
    pub ke: f64,
    #[serde(default)]
    pub ki: f64,
    /// Opacity, a function of `T_e`.
    pub opacity: CoefficientModel,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sources: Vec<SourceSpec>,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("epsilon", self.epsilon), ("c", self.c), ("a", self.a)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("ke", self.ke), ("ki", self.ki)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be non-negative, got {v}")));
            }
        }
        self.kappa.validate("kappa")?;
        self.cve.validate("cve")?;
        self.cvi.validate("cvi")?;
        self.opacity.validate("opacity")?;
        for model in [&self.cve, &self.cvi] {
            if model.exponent <= -1.0 {
                return Err(Error::Config(
                    "heat capacity exponent must exceed -1 (finite energy at T = 0)".into(),
                ));
            }
        }
        for s in &self.sources {
            s.validate()?;
        }
        Ok(())
    }

    /// `a c T^4`, the angle-integrated equilibrium intensity.
    #[inline]
    pub fn emission(&self, t: f64) -> f64 {
        let t2 = t * t;
        self.a * self.c * t2 * t2
    }

    #[inline]
    pub fn conduction_base(&self, species: Species) -> f64 {
        match species {
            Species::Electron => self.ke,
            Species::Ion => self.ki,
        }
    }

    pub fn has_conduction(&self) -> bool {
        self.ke > 0.0 || self.ki > 0.0
    }

    pub fn source_rates(&self, t: f64) -> SourceRates {
        let mut r = SourceRates::default();
        for s in &self.sources {
            let q = source_value(s, t);
            match s.target {
                SourceTarget::Radiation => r.radiation += q,
                SourceTarget::Electron => r.electron += q,
                SourceTarget::Ion => r.ion += q,
            }
        }
        r
    }

    /// Material energy `E_e + E_i` at one point.
    #[inline]
    pub fn material_energy(&self, x: f64, te: f64, ti: f64) -> f64 {
        self.cve.integral(x, te) + self.cvi.integral(x, ti)
    }
}

pub fn opacity(x: f64, te: f64, model: &CoefficientModel) -> Result<f64> {
    model.try_eval(x, te)
}

/// `D_s = K_s T^{5/2}`.
pub fn conduction_coeff(species: Species, t: f64, params: &PhysicalParams) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("temperature must be positive, got {t}")));
    }
    Ok(conduction_unchecked(params.conduction_base(species), t))
}

#[inline]
pub(crate) fn conduction_unchecked(k: f64, t: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * t * t * t.sqrt()
    }
}

/// Radiation temperature from the angular average `rho = psi_0 / 2`.
pub fn radiation_temperature(rho: f64, params: &PhysicalParams) -> Result<f64> {
    if !(rho >= 0.0) {
        return Err(Error::Domain(format!(
            "radiation density must be non-negative, got {rho}"
        )));
    }
    Ok((2.0 * rho / (params.a * params.c)).powf(0.25))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_params() -> PhysicalParams {
        PhysicalParams {
            epsilon: 1.0,
            c: 1.0,
            a: 1.0,
            kappa: CoefficientModel::constant(1.0),
            cve: CoefficientModel::constant(0.1),
            cvi: CoefficientModel::constant(0.2),
            ke: 1.0,
            ki: 0.0,
            opacity: CoefficientModel::constant(10.0),
            sources: vec![],
        }
    }

    #[test]
    fn opacity_power_laws() {
        let cubic = CoefficientModel::power_law(300.0, -3.0);
        assert_eq!(opacity(0.1, 1.0, &cubic).unwrap(), 300.0);
        assert_eq!(opacity(0.1, 2.0, &cubic).unwrap(), 37.5);
        let flat = CoefficientModel::constant(10.0);
        assert_eq!(opacity(0.7, 1.0, &flat).unwrap(), 10.0);
        assert!(matches!(opacity(0.0, 0.0, &cubic), Err(Error::Domain(_))));
        assert!(matches!(opacity(0.0, -1.0, &cubic), Err(Error::Domain(_))));
    }

    #[test]
    fn spatial_multiplier() {
        let m = CoefficientModel::constant(2.0).with_table(SpatialTable {
            breakpoints: vec![0.5],
            values: vec![1.0, 5.0],
        });
        assert_eq!(m.eval(0.25, 1.0), 2.0);
        assert_eq!(m.eval(0.75, 1.0), 10.0);
        assert_eq!(m.eval(0.5, 1.0), 10.0);
    }

    #[test]
    fn conduction() {
        let mut p = unit_params();
        assert_eq!(conduction_coeff(Species::Electron, 1.0, &p).unwrap(), 1.0);
        assert_eq!(conduction_coeff(Species::Ion, 1.0, &p).unwrap(), 0.0);
        p.ke = 0.01;
        let d = conduction_coeff(Species::Electron, 4.0, &p).unwrap();
        assert!((d - 0.32).abs() < 1e-15);
        assert!(conduction_coeff(Species::Electron, 0.0, &p).is_err());
    }

    #[test]
    fn radiation_temperature_values() {
        let p = unit_params();
        assert_eq!(radiation_temperature(0.5, &p).unwrap(), 1.0);
        assert_eq!(radiation_temperature(0.0, &p).unwrap(), 0.0);
        assert!(radiation_temperature(-1e-3, &p).is_err());
        let mut q = unit_params();
        q.a = 0.01372;
        q.c = 29.979;
        let rho = 8.0 * q.a * q.c;
        assert!((radiation_temperature(rho, &q).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn pulse_peak_and_width() {
        let s = SourceSpec {
            target: SourceTarget::Ion,
            amplitude: 25.06628,
            t_w: 1.0,
            t_c: 1.0,
            rho_bar: 3.0,
            shape: PulseShape::Gaussian,
        };
        let peak = source_value(&s, 1.0);
        let expected = 3.0 * 25.06628 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((peak - expected).abs() < 1e-12);
        assert!((peak - 30.0).abs() < 1e-4);
        let one_sd = source_value(&s, 2.0);
        assert!((one_sd - peak * (-0.5f64).exp()).abs() < 1e-12);
        assert!((source_value(&s, 0.0) - one_sd).abs() < 1e-12);
        assert!(source_value(&s, 60.0) < 1e-300);
        assert!(source_value(&s, -60.0) < 1e-300);
    }

    #[test]
    fn printed_sign_grows() {
        let s = SourceSpec {
            target: SourceTarget::Ion,
            amplitude: 1.0,
            t_w: 1.0,
            t_c: 1.0,
            rho_bar: 1.0,
            shape: PulseShape::AsPrinted,
        };
        assert!(source_value(&s, 3.0) > source_value(&s, 1.0));
    }

    #[test]
    fn secant_capacity_reproduces_energy_change() {
        let cv = CoefficientModel::power_law(0.3, 1.0);
        let (a, b) = (0.2, 1.7);
        let e = cv.secant(0.0, a, b) * (b - a);
        assert!((e - (cv.integral(0.0, b) - cv.integral(0.0, a))).abs() < 1e-15);
        assert!((cv.secant(0.0, 1.0, 1.0) - 0.3).abs() < 1e-15);
        let flat = CoefficientModel::constant(0.1);
        assert_eq!(flat.integral(0.0, 2.0), 0.2);
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        let mut p = unit_params();
        assert!(p.validate().is_ok());
        p.epsilon = 0.0;
        assert!(p.validate().is_err());
        let mut p = unit_params();
        p.ke = -1.0;
        assert!(p.validate().is_err());
        let mut p = unit_params();
        p.cve = CoefficientModel::constant(-0.1);
        assert!(p.validate().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn coefficients_positive(t in 1e-6f64..10.0, x in -1.0f64..1.0) {
                let models = [
                    CoefficientModel::power_law(300.0, -3.0),
                    CoefficientModel::power_law(0.5, -2.0),
                    CoefficientModel::power_law(0.01379, -0.5),
                    CoefficientModel::power_law(0.3, 1.0),
                    CoefficientModel::constant(10.0),
                ];
                for m in &models {
                    prop_assert!(m.eval(x, t) > 0.0);
                    if m.exponent > -1.0 {
                        prop_assert!(m.integral(x, t) > 0.0);
                    }
                }
            }

            #[test]
            fn energy_density_inverts(t in 1e-4f64..50.0, b in 0.01f64..5.0, k in -0.9f64..3.0) {
                let m = CoefficientModel::power_law(b, k);
                let back = m.integral_inverse(0.3, m.integral(0.3, t)).unwrap();
                prop_assert!((back - t).abs() <= 1e-12 * t);
                prop_assert!(m.integral_inverse(0.3, 0.0).is_none());
                prop_assert!(m.integral_inverse(0.3, -1.0).is_none());
            }

            #[test]
            fn radiation_temperature_inverts_emission(t in 1e-3f64..10.0) {
                let mut p = unit_params();
                p.a = 0.01372;
                p.c = 299.79;
                let rho = 0.5 * p.emission(t);
                let back = radiation_temperature(rho, &p).unwrap();
                prop_assert!((back - t).abs() <= 1e-14 * t * 4.0);
                let e_r = p.a * back.powi(4);
                prop_assert!((e_r - 2.0 * rho / p.c).abs() <= 1e-14 * e_r * 4.0);
            }

            #[test]
            fn pulse_symmetric(delta in 0.0f64..5.0) {
                let s = SourceSpec {
                    target: SourceTarget::Radiation,
                    amplitude: 25.06628,
                    t_w: 1.0,
                    t_c: 1.0,
                    rho_bar: 3.0,
                    shape: PulseShape::Gaussian,
                };
                let peak = source_value(&s, 1.0);
                let diff = (source_value(&s, 1.0 + delta) - source_value(&s, 1.0 - delta)).abs();
                prop_assert!(diff <= 1e-14 * peak);
            }
        }
    }
}
