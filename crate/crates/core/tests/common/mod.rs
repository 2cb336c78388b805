#![allow(dead_code)]

pub mod oracle;

use tempfile::TempDir;

use tempograph::model::{Collection, ElementClass, Value};
use tempograph::store::{deploy, BalanceMetric, Deployment, LayoutConfig};
use tempograph::synth::{AttrSpec, GenSpec, KindSpec, TopologyModel, ValueDist};

pub fn layout(bins: usize, ipack: usize) -> LayoutConfig {
    LayoutConfig { bins_per_partition: bins, instances_per_slice: ipack, balance_metric: BalanceMetric::Vertices }
}

/// Attributes used by the small random collections of the tests.
pub fn test_attributes() -> Vec<AttrSpec> {
    use ElementClass::{Edge as E, Vertex as V};
    vec![
        AttrSpec::new("isExists", V, KindSpec::Default(Value::Bool(true)), ValueDist::Bool { p_true: 0.3 }, 0.1, 1),
        AttrSpec::new("load", V, KindSpec::Normal, ValueDist::Int { lo: 0, hi: 9 }, 0.4, 2),
        AttrSpec::new("tag", V, KindSpec::Default(Value::Str("none".into())), ValueDist::Str { vocab: 3 }, 0.2, 1),
        AttrSpec::new("site", V, KindSpec::Constant(Value::Str("lab".into())), ValueDist::Str { vocab: 1 }, 0.0, 1),
        AttrSpec::new("isExists", E, KindSpec::Default(Value::Bool(true)), ValueDist::Bool { p_true: 0.3 }, 0.1, 1),
        AttrSpec::new("latency", E, KindSpec::Normal, ValueDist::Float { lo: 0.5, hi: 20.0 }, 0.7, 3),
        AttrSpec::new("active", E, KindSpec::Normal, ValueDist::Bool { p_true: 0.5 }, 0.6, 1),
    ]
}

/// A seeded small collection: preferential attachment or small-world communities.
pub fn random_collection(seed: u64, vertices: usize, instances: usize, directed: bool) -> Collection {
    let topology = if seed.is_multiple_of(2) {
        TopologyModel::PreferentialAttachment { m: 2 }
    } else {
        let communities = (vertices / 12).max(1);
        TopologyModel::SmallWorld { degree: 2, rewire: 0.3, communities }
    };
    GenSpec {
        vertices,
        edges: None,
        instances,
        start: 1_000,
        duration: 60,
        directed,
        topology,
        attributes: test_attributes(),
        seed,
    }
    .generate()
    .unwrap()
}

pub fn deploy_tmp(
    c: &Collection,
    hosts: usize,
    bins: usize,
    ipack: usize,
    cache: usize,
    seed: u64,
) -> (TempDir, Deployment) {
    let dir = TempDir::new().unwrap();
    deploy(c, hosts, &layout(bins, ipack), dir.path(), seed).unwrap();
    let d = Deployment::open(dir.path(), cache).unwrap();
    (dir, d)
}
