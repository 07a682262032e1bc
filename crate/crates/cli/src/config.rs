//! On-disk scenario description.
//!
//! TOML with one table per physical subsystem and one `[[constraint]]` table
//! per constraint. Angle-valued fields are written in degrees (swing limits
//! are quoted that way everywhere people tune them) and converted to radians
//! on load; everything else is SI. A `[meta]` table is ignored on load, which
//! lets a run manifest double as a config file.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use dsm_cbf::lyapunov::AngleThresholdForm;
use dsm_cbf::sim::Controller;
use dsm_cbf::sim::ScenarioConfig;
use dsm_cbf::{ConstraintKind, ConstraintSpec, CraneParams, Error, PdGains, PlantState, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigFile {
    /// Present only in manifests; records how the run was invoked.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meta: Option<MetaSection>,
    pub plant: PlantSection,
    pub prestabilizer: GainsSection,
    pub nominal: GainsSection,
    pub run: RunSection,
    #[serde(rename = "constraint", default, skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<ConstraintSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaSection {
    pub config: String,
    pub out: String,
    pub seed: u64,
    pub controllers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantSection {
    pub gantry_mass: f64,
    pub payload_mass: f64,
    pub rod_length: f64,
    pub gravity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainsSection {
    pub kp: f64,
    pub kd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSection {
    pub target: f64,
    pub v0: f64,
    #[serde(default)]
    pub x0: f64,
    /// Initial swing angle, degrees.
    #[serde(default)]
    pub theta0: f64,
    #[serde(default)]
    pub xdot0: f64,
    /// Initial swing rate, degrees per second.
    #[serde(default)]
    pub thetadot0: f64,
    pub dt: f64,
    pub horizon: f64,
    pub eta: f64,
    /// Swing-limit threshold form: "cosine" (sound) or "linear" (negative
    /// control for the threshold verifier).
    #[serde(default = "default_angle_form")]
    pub angle_form: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSection {
    pub kind: String,
    /// Degrees for `angle-bound`, SI units otherwise.
    pub bound: f64,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cbf_gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cbf_alpha: Option<f64>,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub gamma_scale: f64,
}

fn default_angle_form() -> String {
    "cosine".to_string()
}

fn one() -> f64 {
    1.0
}

fn is_one(x: &f64) -> bool {
    *x == 1.0
}

impl ConstraintSection {
    fn resolve(&self) -> Result<ConstraintSpec> {
        let kind = ConstraintKind::from_str(&self.kind)?;
        if self.cbf_gamma.is_some() != self.cbf_alpha.is_some() {
            return Err(Error::Config(format!(
                "{}: cbf_gamma and cbf_alpha must be given together",
                self.kind
            )));
        }
        let bound = if kind == ConstraintKind::AngleBound {
            self.bound.to_radians()
        } else {
            self.bound
        };
        let mut spec = ConstraintSpec::new(kind, bound, self.alpha);
        if let (Some(g), Some(a)) = (self.cbf_gamma, self.cbf_alpha) {
            spec = spec.with_cbf(g, a);
        }
        Ok(spec.with_gamma_scale(self.gamma_scale))
    }
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<ConfigFile> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize config: {e}")))
    }

    /// Builds and validates the runnable scenario for one controller.
    pub fn resolve(&self, controller: Controller) -> Result<ScenarioConfig> {
        let p = &self.plant;
        let params = CraneParams {
            gantry_mass: p.gantry_mass,
            payload_mass: p.payload_mass,
            rod_length: p.rod_length,
            gravity: p.gravity,
        };
        let mut constraints = Vec::with_capacity(self.constraints.len());
        for c in &self.constraints {
            constraints.push(c.resolve()?);
        }
        let r = &self.run;
        let angle_form = match r.angle_form.as_str() {
            "cosine" => AngleThresholdForm::Cosine,
            "linear" => AngleThresholdForm::Linear,
            other => {
                return Err(Error::Config(format!(
                    "unknown angle_form {other:?}; expected cosine or linear"
                )))
            }
        };
        let cfg = ScenarioConfig {
            params,
            pi_gains: PdGains::new(self.prestabilizer.kp, self.prestabilizer.kd),
            kappa_gains: PdGains::new(self.nominal.kp, self.nominal.kd),
            constraints,
            eta: r.eta,
            target: r.target,
            x0: PlantState::new(
                r.x0,
                r.theta0.to_radians(),
                r.xdot0,
                r.thetadot0.to_radians(),
            ),
            v0: r.v0,
            dt: r.dt,
            horizon: r.horizon,
            controller,
            angle_form,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dsm_cbf::presets;

    fn bundled(name: &str) -> ConfigFile {
        let path = Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("configs")
            .join(name);
        ConfigFile::load(&path).unwrap()
    }

    #[test]
    fn bundled_configs_round_trip_through_serialization() {
        for name in ["scenario_a.cfg", "scenario_b.cfg"] {
            let cfg = bundled(name);
            let reparsed: ConfigFile = toml::from_str(&cfg.to_toml().unwrap()).unwrap();
            assert_eq!(cfg, reparsed, "{name} does not round-trip");
        }
    }

    #[test]
    fn bundled_configs_match_the_library_presets() {
        for controller in Controller::ALL {
            assert_eq!(
                bundled("scenario_a.cfg").resolve(controller).unwrap(),
                presets::scenario_a(controller)
            );
            assert_eq!(
                bundled("scenario_b.cfg").resolve(controller).unwrap(),
                presets::scenario_b(controller)
            );
        }
    }

    #[test]
    fn angle_fields_are_read_as_degrees() {
        let cfg = bundled("scenario_b.cfg");
        let resolved = cfg.resolve(Controller::DsmCbf).unwrap();
        let angle = resolved
            .constraints
            .iter()
            .find(|c| c.kind == ConstraintKind::AngleBound)
            .unwrap();
        assert!((angle.bound - 10.0_f64.to_radians()).abs() < 1e-15);
    }

    #[test]
    fn unknown_kind_and_partial_cbf_pair_are_rejected() {
        let mut cfg = bundled("scenario_a.cfg");
        cfg.constraints[0].kind = "position-sideways".to_string();
        assert!(matches!(
            cfg.resolve(Controller::Nominal),
            Err(Error::Config(_))
        ));

        let mut cfg = bundled("scenario_a.cfg");
        cfg.constraints[0].cbf_alpha = None;
        assert!(matches!(
            cfg.resolve(Controller::Nominal),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn manifest_meta_survives_round_trip_and_is_ignored_by_resolve() {
        let mut cfg = bundled("scenario_a.cfg");
        cfg.meta = Some(MetaSection {
            config: "configs/scenario_a.cfg".to_string(),
            out: "out".to_string(),
            seed: 7,
            controllers: vec!["dsmcbf".to_string()],
        });
        let text = cfg.to_toml().unwrap();
        let reparsed: ConfigFile = toml::from_str(&text).unwrap();
        assert_eq!(cfg, reparsed);
        assert_eq!(
            reparsed.resolve(Controller::DsmCbf).unwrap(),
            presets::scenario_a(Controller::DsmCbf)
        );
    }
}
