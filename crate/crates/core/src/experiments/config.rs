//! TOML case files.
//!
//! ```toml
//! name = "indicator-1d"
//! [domain]
//! lo = [-1.0]
//! hi = [1.0]
//! [shape]
//! kind = "interval"        # interval | ball | annulus | box | union
//! half_width = 0.6666666666666666
//! [source]
//! kind = "indicator_complement"   # or power_law_ball | power_law_1d
//! amplitude = 1.0
//! [boundary]
//! kind = "constant"
//! value = 1.0
//! [sweep]
//! a = [1e-2, 1e-3, 1e-4]
//! grid_rule = "tied"       # tied | fixed
//! spacing_factor = 8.0
//! oracle = "exact"         # exact | brute_force
//! transform = "distance"   # distance | signed
//! ```
//!
//! Unknown keys are rejected. The power-law sources take their geometry
//! (`k`, or the ball) from `[shape]`.

use std::path::Path;

use serde::Deserialize;

use super::{CaseSpec, ExperimentError, GridRule, OracleKind, Result, TransformKind};
use crate::geometry::{DesignDomain, Shape};
use crate::sources::{BoundarySpec, SourceSpec};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub name: Option<String>,
    pub domain: DomainSection,
    pub shape: ShapeSection,
    pub source: SourceSection,
    pub boundary: BoundarySection,
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSection {
    Interval {
        #[serde(default)]
        center: f64,
        half_width: f64,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Annulus {
        center: [f64; 2],
        r_inner: f64,
        r_outer: f64,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Union {
        members: Vec<ShapeSection>,
    },
}

impl ShapeSection {
    fn build(&self) -> Shape<f64> {
        match self {
            ShapeSection::Interval { center, half_width } => Shape::interval(*center, *half_width),
            ShapeSection::Ball { center, radius } => Shape::ball(center, *radius),
            ShapeSection::Annulus {
                center,
                r_inner,
                r_outer,
            } => Shape::Annulus {
                center: *center,
                r_inner: *r_inner,
                r_outer: *r_outer,
            },
            ShapeSection::Box { lo, hi } => Shape::Box {
                lo: lo.clone(),
                hi: hi.clone(),
            },
            ShapeSection::Union { members } => {
                Shape::Union(members.iter().map(|m| m.build()).collect())
            }
        }
    }
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSection {
    IndicatorComplement {
        #[serde(default = "one")]
        amplitude: f64,
    },
    PowerLawBall {
        zeta: f64,
    },
    #[serde(rename = "power_law_1d")]
    PowerLaw1D {
        zeta: f64,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundarySection {
    Constant { value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GridRuleName {
    #[default]
    Tied,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OracleName {
    #[default]
    Exact,
    BruteForce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TransformName {
    #[default]
    Distance,
    Signed,
}

fn default_factor() -> f64 {
    8.0
}

fn default_tolerance() -> f64 {
    1e-10
}

fn default_max_iterations() -> usize {
    50_000
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub a: Vec<f64>,
    #[serde(default)]
    pub grid_rule: GridRuleName,
    #[serde(default = "default_factor")]
    pub spacing_factor: f64,
    #[serde(default)]
    pub nodes: Option<usize>,
    #[serde(default)]
    pub oracle: OracleName,
    #[serde(default)]
    pub transform: TransformName,
    /// Defaults to `max(sup g, amplitude)`.
    #[serde(default)]
    pub c_star: Option<f64>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "yes")]
    pub record_timing: bool,
}

impl ConfigFile {
    pub fn into_case(self) -> Result<CaseSpec> {
        let shape = self.shape.build();
        let domain = DesignDomain::new(self.domain.lo, self.domain.hi, shape.clone())?;
        let source = match self.source {
            SourceSection::IndicatorComplement { amplitude } => SourceSpec::IndicatorComplement {
                shape: shape.clone(),
                amplitude,
            },
            SourceSection::PowerLawBall { zeta } => match &shape {
                Shape::Ball { center, radius } => SourceSpec::PowerLawBall {
                    center: center.clone(),
                    radius: *radius,
                    zeta,
                },
                _ => {
                    return Err(ExperimentError::Config(
                        "power_law_ball needs a ball shape".into(),
                    ))
                }
            },
            SourceSection::PowerLaw1D { zeta } => match &shape {
                Shape::Interval { center, half_width } if *center == 0.0 => {
                    SourceSpec::PowerLaw1D {
                        k: *half_width,
                        zeta,
                    }
                }
                _ => {
                    return Err(ExperimentError::Config(
                        "power_law_1d needs an interval centered at 0".into(),
                    ))
                }
            },
        };
        let BoundarySection::Constant { value } = self.boundary;
        let boundary = BoundarySpec::Constant(value);
        let s = self.sweep;
        let grid_rule = match s.grid_rule {
            GridRuleName::Tied => GridRule::Tied {
                factor: s.spacing_factor,
            },
            GridRuleName::Fixed => GridRule::Fixed {
                nodes: s.nodes.ok_or_else(|| {
                    ExperimentError::Config("grid_rule = \"fixed\" needs `nodes`".into())
                })?,
            },
        };
        let transform = match s.transform {
            TransformName::Distance => TransformKind::Distance,
            TransformName::Signed => {
                let amplitude = match &source {
                    SourceSpec::IndicatorComplement { amplitude, .. } => *amplitude,
                    _ => 0.0,
                };
                TransformKind::Signed {
                    c_star: s.c_star.unwrap_or(value.max(amplitude)),
                }
            }
        };
        let case = CaseSpec {
            name: self.name.unwrap_or_else(|| "case".into()),
            domain,
            source,
            boundary,
            a_list: s.a,
            grid_rule,
            oracle: match s.oracle {
                OracleName::Exact => OracleKind::Exact,
                OracleName::BruteForce => OracleKind::BruteForce,
            },
            transform,
            tolerance: s.tolerance,
            max_iterations: s.max_iterations,
            record_timing: s.record_timing,
        };
        case.validate()?;
        Ok(case)
    }
}

/// Parses and validates a case from TOML text.
pub fn parse_case(text: &str) -> Result<CaseSpec> {
    let file: ConfigFile =
        toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
    file.into_case()
}

pub fn load_case(path: &Path) -> Result<CaseSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
    parse_case(&text).map_err(|e| match e {
        ExperimentError::Config(m) => ExperimentError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
name = "indicator"
[domain]
lo = [-1.0]
hi = [1.0]
[shape]
kind = "interval"
half_width = 0.5
[source]
kind = "indicator_complement"
[boundary]
kind = "constant"
value = 1.0
[sweep]
a = [1e-2, 1e-3]
"#;

    #[test]
    fn parses_defaults() {
        let case = parse_case(BASE).unwrap();
        assert_eq!(case.name, "indicator");
        assert_eq!(case.a_list, vec![1e-2, 1e-3]);
        assert_eq!(case.grid_rule, GridRule::Tied { factor: 8.0 });
        assert_eq!(case.transform, TransformKind::Distance);
        assert!(case.record_timing);
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = BASE.replace("half_width = 0.5", "half_width = 0.5\nwidth = 2.0");
        assert!(matches!(parse_case(&text), Err(ExperimentError::Config(_))));
        let text = BASE.replace("[sweep]", "[sweep]\nspeed = 3");
        assert!(matches!(parse_case(&text), Err(ExperimentError::Config(_))));
        let text = format!("{BASE}\n[extra]\nx = 1\n");
        assert!(matches!(parse_case(&text), Err(ExperimentError::Config(_))));
    }

    #[test]
    fn rejects_increasing_a() {
        let text = BASE.replace("a = [1e-2, 1e-3]", "a = [1e-3, 1e-2]");
        assert!(matches!(parse_case(&text), Err(ExperimentError::Config(_))));
    }

    #[test]
    fn signed_defaults_c_star() {
        let text = BASE.replace("[sweep]", "[sweep]\ntransform = \"signed\"");
        let case = parse_case(&text).unwrap();
        assert_eq!(case.transform, TransformKind::Signed { c_star: 1.0 });
        let low = text.replace("[sweep]", "[sweep]\nc_star = 0.5");
        assert!(parse_case(&low).is_err());
    }

    #[test]
    fn power_law_takes_k_from_shape() {
        let text = BASE.replace(
            "kind = \"indicator_complement\"",
            "kind = \"power_law_1d\"\nzeta = 2.0",
        );
        let case = parse_case(&text).unwrap();
        assert!(
            matches!(case.source, SourceSpec::PowerLaw1D { k, zeta } if k == 0.5 && zeta == 2.0)
        );
    }

    #[test]
    fn fixed_grid_needs_nodes_and_resolution() {
        let text = BASE.replace("[sweep]", "[sweep]\ngrid_rule = \"fixed\"");
        assert!(parse_case(&text).is_err());
        let coarse = BASE.replace("[sweep]", "[sweep]\ngrid_rule = \"fixed\"\nnodes = 51");
        assert!(parse_case(&coarse).is_err());
        let fine = BASE.replace("[sweep]", "[sweep]\ngrid_rule = \"fixed\"\nnodes = 401");
        assert_eq!(
            parse_case(&fine).unwrap().grid_rule,
            GridRule::Fixed { nodes: 401 }
        );
    }
}
