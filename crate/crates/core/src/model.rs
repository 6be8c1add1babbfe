//! Problem definition: mesh, materials, boundary conditions, schedules.

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::mesh::{NodeId, PolygonMesh};
use std::collections::BTreeMap;

/// Diagonal permeability and specific storage of one material zone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub kx: f64,
    pub ky: f64,
    pub ss: f64,
}

impl Material {
    pub fn new(kx: f64, ky: f64, ss: f64) -> Self {
        Material { kx, ky, ss }
    }

    pub fn isotropic(k: f64, ss: f64) -> Self {
        Material { kx: k, ky: k, ss }
    }

    pub fn check(&self, name: &str) -> Result<()> {
        let ok = |v: f64| v.is_finite();
        if !(ok(self.kx) && ok(self.ky) && ok(self.ss)) {
            return Err(Error::Model(format!("material '{name}' has non-finite properties")));
        }
        if self.kx <= 0.0 || self.ky <= 0.0 {
            return Err(Error::Model(format!(
                "material '{name}': permeabilities must be positive (kx={}, ky={})",
                self.kx, self.ky
            )));
        }
        if self.ss < 0.0 {
            return Err(Error::Model(format!(
                "material '{name}': specific storage must be non-negative (Ss={})",
                self.ss
            )));
        }
        Ok(())
    }
}

/// Piecewise-linear head-versus-time function, held constant outside its knots.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    knots: Vec<(f64, f64)>,
}

impl Schedule {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::Model("schedule needs at least one knot".into()));
        }
        if knots.iter().any(|(t, v)| !(t.is_finite() && v.is_finite())) {
            return Err(Error::Model("schedule knots must be finite".into()));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Model("schedule times must be strictly increasing".into()));
        }
        Ok(Schedule { knots })
    }

    pub fn constant(v: f64) -> Self {
        Schedule {
            knots: vec![(0.0, v)],
        }
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn value(&self, t: f64) -> f64 {
        let k = &self.knots;
        if t <= k[0].0 {
            return k[0].1;
        }
        if t >= k[k.len() - 1].0 {
            return k[k.len() - 1].1;
        }
        let i = k.partition_point(|(tk, _)| *tk <= t) - 1;
        let (t0, v0) = k[i];
        let (t1, v1) = k[i + 1];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// Right derivative at `t`.
    pub fn slope(&self, t: f64) -> f64 {
        let k = &self.knots;
        if k.len() < 2 || t < k[0].0 || t >= k[k.len() - 1].0 {
            return 0.0;
        }
        let i = k.partition_point(|(tk, _)| *tk <= t) - 1;
        let (t0, v0) = k[i];
        let (t1, v1) = k[i + 1];
        (v1 - v0) / (t1 - t0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeTarget {
    Nodes(Vec<NodeId>),
    Tag(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum EdgeTarget {
    Edges(Vec<[NodeId; 2]>),
    Tag(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum HeadValue {
    Constant(f64),
    Schedule(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirichletSet {
    pub name: String,
    pub target: NodeTarget,
    pub value: HeadValue,
}

/// Prescribed normal inflow per unit boundary length (positive into the domain).
#[derive(Debug, Clone, PartialEq)]
pub struct FluxSet {
    pub name: String,
    pub target: EdgeTarget,
    pub flux: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialHead {
    Uniform(f64),
    /// One value per node, in mesh node order.
    Values(Vec<f64>),
    /// Steady solution of the boundary conditions at `t = 0`.
    Steady,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransientSettings {
    pub t_end: f64,
    pub dt: f64,
    pub initial: InitialHead,
    /// Keep every `stride`-th step in the history (the final step is always kept).
    pub stride: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Monitor {
    pub name: String,
    pub at: Point2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeepageModel {
    pub units: Option<String>,
    pub mesh: PolygonMesh,
    pub materials: BTreeMap<String, Material>,
    pub dirichlet: Vec<DirichletSet>,
    pub flux: Vec<FluxSet>,
    pub schedules: BTreeMap<String, Schedule>,
    pub transient: Option<TransientSettings>,
    pub monitors: Vec<Monitor>,
}

impl SeepageModel {
    pub fn new(mesh: PolygonMesh, materials: BTreeMap<String, Material>) -> Self {
        SeepageModel {
            units: None,
            mesh,
            materials,
            dirichlet: Vec::new(),
            flux: Vec::new(),
            schedules: BTreeMap::new(),
            transient: None,
            monitors: Vec::new(),
        }
    }

    pub fn with_material(mesh: PolygonMesh, name: &str, material: Material) -> Self {
        let mut m = BTreeMap::new();
        m.insert(name.to_string(), material);
        SeepageModel::new(mesh, m)
    }

    pub fn add_head(&mut self, name: &str, target: NodeTarget, head: f64) {
        self.dirichlet.push(DirichletSet {
            name: name.to_string(),
            target,
            value: HeadValue::Constant(head),
        });
    }

    pub fn add_scheduled_head(&mut self, name: &str, target: NodeTarget, schedule: &str) {
        self.dirichlet.push(DirichletSet {
            name: name.to_string(),
            target,
            value: HeadValue::Schedule(schedule.to_string()),
        });
    }

    /// Checks every cross-reference and value range.
    pub fn check(&self) -> Result<()> {
        for (name, m) in &self.materials {
            m.check(name)?;
        }
        for e in self.mesh.elements() {
            if !self.materials.contains_key(&e.material) {
                return Err(Error::Model(format!(
                    "element {} references undefined material '{}'",
                    e.id, e.material
                )));
            }
        }
        for d in &self.dirichlet {
            match &d.target {
                NodeTarget::Nodes(ids) => {
                    if let Some(bad) = ids.iter().find(|id| self.mesh.node_index(**id).is_none()) {
                        return Err(Error::Model(format!(
                            "dirichlet set '{}' references missing node {}",
                            d.name, bad
                        )));
                    }
                }
                NodeTarget::Tag(t) => {
                    if !self.mesh.has_tag(t) {
                        return Err(Error::Model(format!(
                            "dirichlet set '{}' references unknown boundary tag '{}'",
                            d.name, t
                        )));
                    }
                }
            }
            match &d.value {
                HeadValue::Constant(v) if !v.is_finite() => {
                    return Err(Error::Model(format!("dirichlet set '{}' has non-finite head", d.name)))
                }
                HeadValue::Schedule(s) if !self.schedules.contains_key(s) => {
                    return Err(Error::Model(format!(
                        "dirichlet set '{}' references undefined schedule '{}'",
                        d.name, s
                    )))
                }
                _ => {}
            }
        }
        for f in &self.flux {
            if !f.flux.is_finite() {
                return Err(Error::Model(format!("flux set '{}' has non-finite value", f.name)));
            }
            match &f.target {
                EdgeTarget::Edges(edges) => {
                    if let Some(bad) = edges
                        .iter()
                        .flatten()
                        .find(|id| self.mesh.node_index(**id).is_none())
                    {
                        return Err(Error::Model(format!(
                            "flux set '{}' references missing node {}",
                            f.name, bad
                        )));
                    }
                }
                EdgeTarget::Tag(t) => {
                    if !self.mesh.has_tag(t) {
                        return Err(Error::Model(format!(
                            "flux set '{}' references unknown boundary tag '{}'",
                            f.name, t
                        )));
                    }
                }
            }
        }
        if let Some(tr) = &self.transient {
            if !(tr.dt > 0.0 && tr.dt.is_finite()) {
                return Err(Error::Model(format!("time step must be positive, got {}", tr.dt)));
            }
            if !(tr.t_end >= tr.dt && tr.t_end.is_finite()) {
                return Err(Error::Model(format!(
                    "t_end ({}) must be at least one time step ({})",
                    tr.t_end, tr.dt
                )));
            }
            if tr.stride == 0 {
                return Err(Error::Model("output stride must be at least 1".into()));
            }
            match &tr.initial {
                InitialHead::Values(v) if v.len() != self.mesh.num_nodes() => {
                    return Err(Error::Model(format!(
                        "initial head has {} values for {} nodes",
                        v.len(),
                        self.mesh.num_nodes()
                    )))
                }
                InitialHead::Values(v) if v.iter().any(|x| !x.is_finite()) => {
                    return Err(Error::Model("initial head has non-finite values".into()))
                }
                InitialHead::Uniform(v) if !v.is_finite() => {
                    return Err(Error::Model("initial head is not finite".into()))
                }
                _ => {}
            }
        }
        for m in &self.monitors {
            if !(m.at.x.is_finite() && m.at.y.is_finite()) {
                return Err(Error::Model(format!("monitor '{}' has non-finite position", m.name)));
            }
        }
        Ok(())
    }

    pub fn target_nodes(&self, target: &NodeTarget) -> Vec<NodeId> {
        match target {
            NodeTarget::Nodes(ids) => ids.clone(),
            NodeTarget::Tag(t) => self.mesh.nodes_with_tag(t),
        }
    }

    pub fn target_edges(&self, target: &EdgeTarget) -> Vec<[NodeId; 2]> {
        match target {
            EdgeTarget::Edges(e) => e.clone(),
            EdgeTarget::Tag(t) => self.mesh.edges_with_tag(t),
        }
    }

    fn head_value(&self, value: &HeadValue, t: f64) -> f64 {
        match value {
            HeadValue::Constant(v) => *v,
            HeadValue::Schedule(s) => self.schedules[s].value(t),
        }
    }

    fn head_slope(&self, value: &HeadValue, t: f64) -> f64 {
        match value {
            HeadValue::Constant(_) => 0.0,
            HeadValue::Schedule(s) => self.schedules[s].slope(t),
        }
    }

    /// Prescribed heads at time `t` as (dof, head); later sets override earlier ones.
    pub fn dirichlet_at(&self, t: f64) -> Vec<(usize, f64)> {
        self.collect_dirichlet(|v| self.head_value(v, t))
    }

    /// Time derivative of the prescribed heads at `t` as (dof, rate).
    pub fn dirichlet_rate_at(&self, t: f64) -> Vec<(usize, f64)> {
        self.collect_dirichlet(|v| self.head_slope(v, t))
    }

    fn collect_dirichlet(&self, f: impl Fn(&HeadValue) -> f64) -> Vec<(usize, f64)> {
        let mut map = BTreeMap::new();
        for d in &self.dirichlet {
            let v = f(&d.value);
            for id in self.target_nodes(&d.target) {
                if let Some(i) = self.mesh.node_index(id) {
                    map.insert(i, v);
                }
            }
        }
        map.into_iter().collect()
    }

    pub fn material_of(&self, elem: usize) -> &Material {
        &self.materials[&self.mesh.elements()[elem].material]
    }
}
