//! Seeded synthetic collections for tests and benchmarks.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{AttributeSchema, Collection, Edge, ElementClass, GraphInstance, GraphTemplate, Value, ValueType};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum TopologyModel {
    Path,
    /// Rows of `width` vertices joined right and down.
    Grid {
        width: usize,
    },
    /// Ring lattices of even `degree`, each edge rewired with probability
    /// `rewire`, split over `communities` disconnected groups of uneven size.
    SmallWorld {
        degree: usize,
        rewire: f64,
        communities: usize,
    },
    /// Starts from a clique of `m + 1` vertices; every later vertex links to
    /// `m` distinct earlier ones chosen proportionally to degree.
    PreferentialAttachment {
        m: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "kebab-case")]
pub enum ValueDist {
    Bool {
        p_true: f64,
    },
    Int {
        lo: i64,
        hi: i64,
    },
    /// Rounded to three decimals.
    Float {
        lo: f64,
        hi: f64,
    },
    /// `s0` .. `s{vocab-1}`.
    Str {
        vocab: usize,
    },
}

impl ValueDist {
    fn value_type(&self) -> ValueType {
        match self {
            ValueDist::Bool { .. } => ValueType::Boolean,
            ValueDist::Int { .. } => ValueType::Integer,
            ValueDist::Float { .. } => ValueType::Float,
            ValueDist::Str { .. } => ValueType::String,
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> Value {
        match self {
            ValueDist::Bool { p_true } => Value::Bool(rng.gen_bool(p_true.clamp(0.0, 1.0))),
            ValueDist::Int { lo, hi } => Value::Int(rng.gen_range(*lo..=*hi)),
            ValueDist::Float { lo, hi } => Value::Float((rng.gen_range(*lo..*hi) * 1000.0).round() / 1000.0),
            ValueDist::Str { vocab } => Value::Str(format!("s{}", rng.gen_range(0..(*vocab).max(1)))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum KindSpec {
    Normal,
    Default(Value),
    Constant(Value),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttrSpec {
    pub name: String,
    pub class: ElementClass,
    pub kind: KindSpec,
    pub dist: ValueDist,
    /// Chance that an element carries values in an instance.
    pub presence: f64,
    /// Values per present element, drawn uniformly from `1..=max_values`.
    pub max_values: usize,
}

impl AttrSpec {
    pub fn new(
        name: &str,
        class: ElementClass,
        kind: KindSpec,
        dist: ValueDist,
        presence: f64,
        max_values: usize,
    ) -> Self {
        Self { name: name.to_string(), class, kind, dist, presence, max_values }
    }

    fn schema(&self) -> AttributeSchema {
        match &self.kind {
            KindSpec::Normal => AttributeSchema::normal(self.name.clone(), self.dist.value_type()),
            KindSpec::Default(v) => AttributeSchema::with_default(self.name.clone(), v.clone()),
            KindSpec::Constant(v) => AttributeSchema::constant(self.name.clone(), v.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub vertices: usize,
    /// Checked against the count implied by the topology when given.
    pub edges: Option<usize>,
    pub instances: usize,
    pub start: i64,
    pub duration: i64,
    pub directed: bool,
    pub topology: TopologyModel,
    pub attributes: Vec<AttrSpec>,
    pub seed: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("infeasible topology: {0}")]
    Infeasible(String),
}

impl GenSpec {
    /// The default benchmark collection: 10,000 vertices, 20,000 edges in
    /// small-world communities, 40 instances, 7 vertex and 7 edge attributes.
    pub fn bench(seed: u64) -> Self {
        Self {
            vertices: 10_000,
            edges: Some(20_000),
            instances: 40,
            start: 0,
            duration: 3600,
            directed: true,
            topology: TopologyModel::SmallWorld { degree: 4, rewire: 0.1, communities: 200 },
            attributes: bench_attributes(),
            seed,
        }
    }

    /// Edge count implied by the topology.
    pub fn implied_edges(&self) -> Result<usize, GenError> {
        let n = self.vertices;
        let bad = |m: String| Err(GenError::Infeasible(m));
        match &self.topology {
            TopologyModel::Path => Ok(n.saturating_sub(1)),
            TopologyModel::Grid { width } => {
                if *width == 0 || !n.is_multiple_of(*width) {
                    return bad(format!("{n} vertices do not fill rows of {width}"));
                }
                let rows = n / width;
                Ok(rows * (width - 1) + (rows - 1) * width)
            }
            TopologyModel::SmallWorld { degree, communities, .. } => {
                if degree % 2 != 0 || *degree == 0 {
                    return bad(format!("small-world degree {degree} must be even and positive"));
                }
                if *communities == 0 || n < communities * (degree + 1) {
                    return bad(format!("{n} vertices cannot hold {communities} rings of degree {degree}"));
                }
                Ok(n * degree / 2)
            }
            TopologyModel::PreferentialAttachment { m } => {
                if *m == 0 || n <= *m {
                    return bad(format!("preferential attachment needs more than {m} vertices"));
                }
                Ok((m + 1) * m / 2 + (n - m - 1) * m)
            }
        }
    }

    pub fn generate(&self) -> Result<Collection, GenError> {
        let implied = self.implied_edges()?;
        if let Some(e) = self.edges {
            if e != implied {
                return Err(GenError::Infeasible(format!("{e} edges requested but the topology yields {implied}")));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let pairs = match &self.topology {
            TopologyModel::Path => (1..self.vertices as u64).map(|v| (v - 1, v)).collect(),
            TopologyModel::Grid { width } => grid(self.vertices, *width),
            TopologyModel::SmallWorld { degree, rewire, communities } => {
                small_world(self.vertices, *degree, *rewire, *communities, &mut rng)
            }
            TopologyModel::PreferentialAttachment { m } => preferential(self.vertices, *m, &mut rng),
        };
        debug_assert_eq!(pairs.len(), implied);
        let edges: Vec<Edge> = pairs.into_iter().enumerate().map(|(i, (s, d))| Edge::new(i as u64, s, d)).collect();
        let vertices: Vec<u64> = (0..self.vertices as u64).collect();
        let schema = |c| self.attributes.iter().filter(|a| a.class == c).map(AttrSpec::schema).collect();
        let template = GraphTemplate::new(
            self.directed,
            vertices,
            edges,
            schema(ElementClass::Vertex),
            schema(ElementClass::Edge),
        );

        let mut instances = Vec::with_capacity(self.instances);
        for k in 0..self.instances {
            let start = self.start + k as i64 * self.duration;
            let mut b = GraphInstance::builder(start, start + self.duration);
            for a in &self.attributes {
                if matches!(a.kind, KindSpec::Constant(_)) {
                    continue;
                }
                let count = match a.class {
                    ElementClass::Vertex => self.vertices,
                    ElementClass::Edge => template.edges().len(),
                };
                for id in 0..count as u64 {
                    if rng.gen_bool(a.presence.clamp(0.0, 1.0)) {
                        for _ in 0..rng.gen_range(1..=a.max_values.max(1)) {
                            b.push(a.class, id, &a.name, a.dist.sample(&mut rng));
                        }
                    }
                }
            }
            instances.push(b.build());
        }
        Ok(Collection::new(template, instances))
    }
}

/// Seven vertex and seven edge attributes, none constant, plus one constant per class.
pub fn bench_attributes() -> Vec<AttrSpec> {
    use ElementClass::{Edge as E, Vertex as V};
    vec![
        AttrSpec::new("isExists", V, KindSpec::Default(Value::Bool(true)), ValueDist::Bool { p_true: 0.5 }, 0.04, 1),
        AttrSpec::new("hops_seen", V, KindSpec::Normal, ValueDist::Int { lo: 1, hi: 30 }, 0.2, 2),
        AttrSpec::new("rtt", V, KindSpec::Normal, ValueDist::Float { lo: 0.5, hi: 300.0 }, 0.2, 3),
        AttrSpec::new("dest", V, KindSpec::Default(Value::Bool(false)), ValueDist::Bool { p_true: 0.8 }, 0.05, 1),
        AttrSpec::new("ttl", V, KindSpec::Default(Value::Int(64)), ValueDist::Int { lo: 1, hi: 255 }, 0.1, 1),
        AttrSpec::new("label", V, KindSpec::Normal, ValueDist::Str { vocab: 50 }, 0.1, 1),
        AttrSpec::new("asn", V, KindSpec::Normal, ValueDist::Int { lo: 1, hi: 65_000 }, 0.1, 1),
        AttrSpec::new("role", V, KindSpec::Constant(Value::Str("router".into())), ValueDist::Str { vocab: 1 }, 0.0, 1),
        AttrSpec::new("isExists", E, KindSpec::Default(Value::Bool(true)), ValueDist::Bool { p_true: 0.5 }, 0.04, 1),
        AttrSpec::new("latency", E, KindSpec::Normal, ValueDist::Float { lo: 0.5, hi: 50.0 }, 0.6, 3),
        AttrSpec::new("bandwidth", E, KindSpec::Normal, ValueDist::Float { lo: 1.0, hi: 1000.0 }, 0.1, 1),
        AttrSpec::new("loss", E, KindSpec::Default(Value::Float(0.0)), ValueDist::Float { lo: 0.0, hi: 1.0 }, 0.05, 1),
        AttrSpec::new("traces", E, KindSpec::Normal, ValueDist::Int { lo: 1, hi: 100 }, 0.2, 1),
        AttrSpec::new("stable", E, KindSpec::Default(Value::Bool(true)), ValueDist::Bool { p_true: 0.3 }, 0.05, 1),
        AttrSpec::new("proto", E, KindSpec::Normal, ValueDist::Str { vocab: 4 }, 0.05, 1),
        AttrSpec::new("medium", E, KindSpec::Constant(Value::Str("ip".into())), ValueDist::Str { vocab: 1 }, 0.0, 1),
    ]
}

fn grid(n: usize, width: usize) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for v in 0..n {
        if (v + 1) % width != 0 {
            out.push((v as u64, v as u64 + 1));
        }
        if v + width < n {
            out.push((v as u64, (v + width) as u64));
        }
    }
    out
}

/// Community sizes summing to `n`, each at least `min`, uneven.
fn community_sizes(n: usize, communities: usize, min: usize, rng: &mut impl Rng) -> Vec<usize> {
    let weights: Vec<f64> = (0..communities).map(|_| rng.gen_range(0.2..1.0)).collect();
    let spare = n - communities * min;
    let total: f64 = weights.iter().sum();
    let mut sizes: Vec<usize> = weights.iter().map(|w| min + (w / total * spare as f64).floor() as usize).collect();
    let mut left = n - sizes.iter().sum::<usize>();
    let mut i = 0;
    while left > 0 {
        sizes[i % communities] += 1;
        left -= 1;
        i += 1;
    }
    sizes
}

fn small_world(n: usize, degree: usize, rewire: f64, communities: usize, rng: &mut impl Rng) -> Vec<(u64, u64)> {
    let sizes = community_sizes(n, communities, degree + 1, rng);
    let mut out = Vec::with_capacity(n * degree / 2);
    let mut base = 0usize;
    for size in sizes {
        let mut seen: HashSet<(usize, usize)> = HashSet::new();
        let key = |a: usize, b: usize| (a.min(b), a.max(b));
        let mut ring = Vec::with_capacity(size * degree / 2);
        for i in 0..size {
            for j in 1..=degree / 2 {
                let t = (i + j) % size;
                ring.push((i, t));
                seen.insert(key(i, t));
            }
        }
        for (i, t) in ring.iter_mut() {
            if rng.gen_bool(rewire.clamp(0.0, 1.0)) {
                for _ in 0..8 {
                    let c = rng.gen_range(0..size);
                    if c != *i && !seen.contains(&key(*i, c)) {
                        seen.remove(&key(*i, *t));
                        seen.insert(key(*i, c));
                        *t = c;
                        break;
                    }
                }
            }
        }
        out.extend(ring.into_iter().map(|(i, t)| ((base + i) as u64, (base + t) as u64)));
        base += size;
    }
    out
}

fn preferential(n: usize, m: usize, rng: &mut impl Rng) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let mut ends: Vec<u64> = Vec::new();
    for a in 0..=m as u64 {
        for b in a + 1..=m as u64 {
            out.push((a, b));
            ends.extend([a, b]);
        }
    }
    for v in (m + 1) as u64..n as u64 {
        let mut chosen: Vec<u64> = Vec::with_capacity(m);
        while chosen.len() < m {
            let t = *ends.choose(rng).expect("clique seeds the endpoint list");
            if !chosen.contains(&t) {
                chosen.push(t);
            }
        }
        for t in chosen {
            out.push((v, t));
            ends.extend([v, t]);
        }
    }
    out
}
