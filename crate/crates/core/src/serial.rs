//! JSON documents. Points are comma-joined labels and rationals are
//! `"num/den"` strings, so no value passes through floating point.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coupling::{
    CouplingPlan, CouplingSample, DensityRatio, ExtensionKernel, KernelRow, MeasureLadder, WindowSchedule,
};
use crate::error::{Error, Result};
use crate::measure::{Alphabet, MassFunction, ProcessSequenceSpec, ProductSpace, TailRule};
use crate::rational;
use crate::skorohod::{Backend, MetricSpaceModel, PartitionTree};

pub type MassMap = BTreeMap<String, String>;

pub fn mass_to_map(law: &MassFunction) -> MassMap {
    law.iter()
        .map(|(p, m)| (law.format_point(p), rational::format(m)))
        .collect()
}

pub fn mass_from_map(space: &Arc<ProductSpace>, map: &MassMap) -> Result<MassFunction> {
    let entries = map
        .iter()
        .map(|(k, v)| Ok((space.parse_point(k)?, rational::parse(v)?)))
        .collect::<Result<Vec<_>>>()?;
    MassFunction::new(space.clone(), entries)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailDocument {
    pub eventually_equal: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub space: Vec<Vec<String>>,
    pub members: Vec<MassMap>,
    pub limit: MassMap,
    pub tail: TailDocument,
}

impl SpecDocument {
    pub fn from_spec(spec: &ProcessSequenceSpec) -> Self {
        let TailRule::EventuallyEqual(m) = spec.tail();
        Self {
            space: spec
                .space()
                .coordinates()
                .iter()
                .map(|a| a.symbols().to_vec())
                .collect(),
            members: spec.members().iter().map(mass_to_map).collect(),
            limit: mass_to_map(spec.limit()),
            tail: TailDocument { eventually_equal: m },
        }
    }

    pub fn to_spec(&self) -> Result<ProcessSequenceSpec> {
        let space = ProductSpace::new(
            self.space
                .iter()
                .map(|labels| Alphabet::new(labels.iter().cloned()))
                .collect::<Result<Vec<_>>>()?,
        );
        sequence_from_maps(&space, &self.members, &self.limit, self.tail.eventually_equal)
    }
}

fn sequence_from_maps(
    space: &Arc<ProductSpace>,
    members: &[MassMap],
    limit: &MassMap,
    horizon: usize,
) -> Result<ProcessSequenceSpec> {
    let members = members
        .iter()
        .map(|m| mass_from_map(space, m))
        .collect::<Result<Vec<_>>>()?;
    let limit = mass_from_map(space, limit)?;
    ProcessSequenceSpec::new(space.clone(), members, limit, TailRule::EventuallyEqual(horizon))
}

pub fn spec_to_json(spec: &ProcessSequenceSpec) -> String {
    serde_json::to_string_pretty(&SpecDocument::from_spec(spec)).expect("spec documents serialize")
}

pub fn spec_from_json(text: &str) -> Result<ProcessSequenceSpec> {
    serde_json::from_str::<SpecDocument>(text)?.to_spec()
}

/// SHA-256 of the compact spec document.
pub fn spec_hash(spec: &ProcessSequenceSpec) -> String {
    let compact = serde_json::to_string(&SpecDocument::from_spec(spec)).expect("spec documents serialize");
    hex::encode(Sha256::digest(compact.as_bytes()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleDocument {
    pub horizon: usize,
    pub windows: Vec<usize>,
    pub deficits: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderDocument {
    pub nu: Vec<MassMap>,
    pub h: Vec<MassMap>,
    pub mu: Vec<MassMap>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelRowDocument {
    pub used: bool,
    pub row: MassMap,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanDocument {
    pub spec: SpecDocument,
    pub schedule: ScheduleDocument,
    pub ladder: LadderDocument,
    pub law_of_n: MassMap,
    pub v_laws: Vec<MassMap>,
    pub w_laws: Vec<MassMap>,
    pub extension_kernels: Vec<BTreeMap<String, KernelRowDocument>>,
}

impl PlanDocument {
    pub fn from_plan(plan: &CouplingPlan) -> Self {
        let space = plan.spec.space();
        let ratio_map = |h: &DensityRatio| -> MassMap {
            h.iter()
                .map(|(p, r)| (space.format_point(p), rational::format(r)))
                .collect()
        };
        Self {
            spec: SpecDocument::from_spec(&plan.spec),
            schedule: ScheduleDocument {
                horizon: plan.schedule.horizon(),
                windows: plan.schedule.windows().to_vec(),
                deficits: plan.schedule.deficits().iter().map(rational::format).collect(),
            },
            ladder: LadderDocument {
                nu: plan.ladder.nu.iter().map(mass_to_map).collect(),
                h: plan.ladder.h.iter().map(ratio_map).collect(),
                mu: plan.ladder.mu.iter().map(mass_to_map).collect(),
            },
            law_of_n: mass_to_map(&plan.law_of_n),
            v_laws: plan.v_laws.iter().map(mass_to_map).collect(),
            w_laws: plan.w_laws.iter().map(mass_to_map).collect(),
            extension_kernels: plan
                .extension_kernels
                .iter()
                .zip(plan.schedule.windows())
                .map(|(kernel, &k)| {
                    let prefix_space = space.prefix(k).expect("scheduled windows fit the space");
                    kernel
                        .iter()
                        .map(|(prefix, row)| {
                            (
                                prefix_space.format_point(prefix),
                                KernelRowDocument {
                                    used: row.used,
                                    row: mass_to_map(&row.row),
                                },
                            )
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// Rebuilds the plan structurally. Invariants are not re-certified here;
    /// that is what `verify::audit_plan` is for.
    pub fn to_plan(&self) -> Result<CouplingPlan> {
        let spec = self.spec.to_spec()?;
        let space = spec.space().clone();
        let count = spec.horizon() + 1;
        let sized = |what: &str, len: usize| -> Result<()> {
            if len == count {
                Ok(())
            } else {
                Err(Error::Document(format!("{what} needs {count} entries, found {len}")))
            }
        };
        if self.schedule.horizon != spec.horizon() {
            return Err(Error::Document("schedule horizon differs from the spec tail".into()));
        }
        for (what, len) in [
            ("ladder.nu", self.ladder.nu.len()),
            ("ladder.h", self.ladder.h.len()),
            ("ladder.mu", self.ladder.mu.len()),
            ("v_laws", self.v_laws.len()),
            ("w_laws", self.w_laws.len()),
            ("extension_kernels", self.extension_kernels.len()),
        ] {
            sized(what, len)?;
        }
        if let Some(&k) = self.schedule.windows.iter().find(|&&k| k > space.len()) {
            return Err(Error::WindowOutOfRange {
                window: k,
                coordinates: space.len(),
            });
        }
        let schedule = WindowSchedule::from_parts(
            self.schedule.windows.clone(),
            self.schedule
                .deficits
                .iter()
                .map(|d| rational::parse(d))
                .collect::<Result<_>>()?,
            self.schedule.horizon,
        )?;
        let full = |maps: &[MassMap]| -> Result<Vec<MassFunction>> {
            maps.iter().map(|m| mass_from_map(&space, m)).collect()
        };
        let h = self
            .ladder
            .h
            .iter()
            .map(|m| {
                m.iter()
                    .map(|(k, v)| Ok((space.parse_point(k)?, rational::parse(v)?)))
                    .collect::<Result<_>>()
                    .map(DensityRatio::new)
            })
            .collect::<Result<Vec<_>>>()?;
        let ladder = MeasureLadder {
            nu: full(&self.ladder.nu)?,
            h,
            mu: full(&self.ladder.mu)?,
        };
        let index_space = crate::coupling::index_space(count)?;
        let law_of_n = mass_from_map(&index_space, &self.law_of_n)?;
        let w_laws = self
            .w_laws
            .iter()
            .zip(schedule.windows())
            .map(|(m, &k)| mass_from_map(&space.prefix(k)?, m))
            .collect::<Result<Vec<_>>>()?;
        let extension_kernels = self
            .extension_kernels
            .iter()
            .zip(schedule.windows())
            .map(|(rows, &k)| {
                let prefix_space = space.prefix(k)?;
                rows.iter()
                    .map(|(prefix, row)| {
                        Ok((
                            prefix_space.parse_point(prefix)?,
                            KernelRow {
                                row: mass_from_map(&space, &row.row)?,
                                used: row.used,
                            },
                        ))
                    })
                    .collect::<Result<ExtensionKernel>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CouplingPlan {
            v_laws: full(&self.v_laws)?,
            spec,
            schedule,
            ladder,
            law_of_n,
            w_laws,
            extension_kernels,
        })
    }
}

pub fn plan_to_json(plan: &CouplingPlan) -> String {
    serde_json::to_string_pretty(&PlanDocument::from_plan(plan)).expect("plan documents serialize")
}

pub fn plan_from_json(text: &str) -> Result<CouplingPlan> {
    serde_json::from_str::<PlanDocument>(text)?.to_plan()
}

/// One JSON-lines sample record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub seed: u64,
    pub stream: u64,
    #[serde(rename = "N")]
    pub index: usize,
    #[serde(rename = "Z_hat")]
    pub z_hat: String,
    #[serde(rename = "Z_hat_n")]
    pub z_hat_n: Vec<String>,
}

impl SampleRecord {
    pub fn new(plan: &CouplingPlan, seed: u64, stream: u64, sample: &CouplingSample) -> Self {
        let space = plan.spec.space();
        Self {
            seed,
            stream,
            index: sample.index,
            z_hat: space.format_point(&sample.z_hat),
            z_hat_n: sample.z_hat_n.iter().map(|p| space.format_point(p)).collect(),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("sample records serialize")
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separable_support: Option<Vec<bool>>,
}

fn parse_rows(rows: &[Vec<String>]) -> Result<Vec<Vec<rational::Rational>>> {
    rows.iter()
        .map(|r| r.iter().map(|x| rational::parse(x)).collect())
        .collect()
}

impl ModelDocument {
    pub fn to_model(&self) -> Result<MetricSpaceModel> {
        match (&self.dist, &self.coords) {
            (Some(dist), None) => {
                if self.metric.as_deref().is_some_and(|m| m != "table") {
                    return Err(Error::InvalidMetric("a distance table implies metric \"table\"".into()));
                }
                let labels = self
                    .points
                    .clone()
                    .ok_or_else(|| Error::InvalidMetric("a distance table needs point labels".into()))?;
                MetricSpaceModel::from_table(labels, parse_rows(dist)?, self.separable_support.clone())
            }
            (None, Some(coords)) => {
                if self.metric.as_deref() != Some("linf") {
                    return Err(Error::InvalidMetric("coordinates need \"metric\": \"linf\"".into()));
                }
                let labels = self
                    .points
                    .clone()
                    .unwrap_or_else(|| (0..coords.len()).map(|i| format!("p{i}")).collect());
                MetricSpaceModel::from_coords(labels, parse_rows(coords)?, self.separable_support.clone())
            }
            _ => Err(Error::InvalidMetric("give exactly one of \"dist\" or \"coords\"".into())),
        }
    }

    pub fn from_model(model: &MetricSpaceModel) -> Self {
        let rows = |rows: &[Vec<rational::Rational>]| -> Vec<Vec<String>> {
            rows.iter().map(|r| r.iter().map(rational::format).collect()).collect()
        };
        let mut doc = ModelDocument {
            points: Some(model.labels().to_vec()),
            separable_support: Some(model.separable_support().to_vec()),
            ..Default::default()
        };
        match (model.backend(), model.coords()) {
            (Backend::Linf, Some(coords)) => {
                doc.coords = Some(rows(coords));
                doc.metric = Some("linf".into());
            }
            _ => doc.dist = Some(rows(model.table())),
        }
        doc
    }
}

pub fn model_from_json(text: &str) -> Result<MetricSpaceModel> {
    serde_json::from_str::<ModelDocument>(text)?.to_model()
}

pub fn model_to_json(model: &MetricSpaceModel) -> String {
    serde_json::to_string_pretty(&ModelDocument::from_model(model)).expect("model documents serialize")
}

/// Law sequence on the points of a metric model.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawsDocument {
    pub members: Vec<MassMap>,
    pub limit: MassMap,
    pub tail: TailDocument,
}

impl LawsDocument {
    pub fn from_spec(laws: &ProcessSequenceSpec) -> Self {
        let doc = SpecDocument::from_spec(laws);
        Self {
            members: doc.members,
            limit: doc.limit,
            tail: doc.tail,
        }
    }

    pub fn to_spec(&self, model: &MetricSpaceModel) -> Result<ProcessSequenceSpec> {
        sequence_from_maps(model.point_space(), &self.members, &self.limit, self.tail.eventually_equal)
    }
}

pub fn laws_from_json(text: &str, model: &MetricSpaceModel) -> Result<ProcessSequenceSpec> {
    serde_json::from_str::<LawsDocument>(text)?.to_spec(model)
}

pub fn laws_to_json(laws: &ProcessSequenceSpec) -> String {
    serde_json::to_string_pretty(&LawsDocument::from_spec(laws)).expect("law documents serialize")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BallDocument {
    pub center: String,
    pub radius: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellDocument {
    pub index: Vec<u32>,
    pub members: Vec<String>,
    pub residual: bool,
    pub mass: String,
    pub diameter: String,
    pub diameter_bound: String,
    pub ball: Option<BallDocument>,
    pub sphere_mass: String,
    pub boundary_mass: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeDocument {
    pub depth: usize,
    pub backend: String,
    /// `"ambient"` for linf boundaries, `"vacuous"` for the discrete table topology.
    pub certificate: String,
    pub levels: Vec<Vec<CellDocument>>,
}

impl TreeDocument {
    pub fn from_tree(model: &MetricSpaceModel, tree: &PartitionTree) -> Self {
        Self {
            depth: tree.depth,
            backend: tree.backend.name().into(),
            certificate: match tree.backend {
                Backend::Linf => "ambient".into(),
                Backend::Table => "vacuous".into(),
            },
            levels: tree
                .levels
                .iter()
                .enumerate()
                .map(|(i, cells)| {
                    cells
                        .iter()
                        .map(|c| CellDocument {
                            index: c.index.clone(),
                            members: c.members.iter().map(|&x| model.label(x).to_string()).collect(),
                            residual: c.is_residual(),
                            mass: rational::format(&c.mass),
                            diameter: rational::format(&c.diameter),
                            diameter_bound: format!("1/{}", i + 1),
                            ball: c.ball.as_ref().map(|b| BallDocument {
                                center: model.label(b.center).to_string(),
                                radius: rational::format(&b.radius),
                            }),
                            sphere_mass: rational::format(&c.sphere_mass),
                            boundary_mass: rational::format(&c.boundary_mass),
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

pub fn tree_to_json(model: &MetricSpaceModel, tree: &PartitionTree) -> String {
    serde_json::to_string_pretty(&TreeDocument::from_tree(model, tree)).expect("tree documents serialize")
}
