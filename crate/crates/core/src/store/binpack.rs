use serde::{Deserialize, Serialize};

use crate::partition::{SubgraphId, SubgraphTemplate};

/// What a bin's load measures.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BalanceMetric {
    #[default]
    Vertices,
    Edges,
    VerticesEdges,
}

impl BalanceMetric {
    pub fn weight(self, sg: &SubgraphTemplate) -> u64 {
        let (v, e) = (sg.vertex_count() as u64, sg.edge_count() as u64);
        match self {
            BalanceMetric::Vertices => v,
            BalanceMetric::Edges => e,
            BalanceMetric::VerticesEdges => v + e,
        }
    }
}

impl std::str::FromStr for BalanceMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "vertices" => Ok(BalanceMetric::Vertices),
            "edges" => Ok(BalanceMetric::Edges),
            "vertices+edges" | "both" => Ok(BalanceMetric::VerticesEdges),
            _ => Err(format!("unknown balance metric `{s}`")),
        }
    }
}

/// Longest-processing-time assignment of weighted items to `bins` bins.
///
/// Items are taken heaviest first (ties by id) and each goes to the
/// currently lightest bin (ties by bin index). Returns the bin of every
/// item, in input order.
pub fn lpt<K: Ord + Copy>(items: &[(K, u64)], bins: usize) -> Vec<usize> {
    let bins = bins.max(1);
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| items[b].1.cmp(&items[a].1).then(items[a].0.cmp(&items[b].0)));
    let mut load = vec![0u64; bins];
    let mut out = vec![0usize; items.len()];
    for i in order {
        let b = (0..bins).min_by_key(|&b| (load[b], b)).unwrap();
        load[b] += items[i].1;
        out[i] = b;
    }
    out
}

/// Groups sub-graphs into at most `bins` bins; each bin's ids are ascending.
pub fn bin_pack(subgraphs: &[&SubgraphTemplate], bins: usize, metric: BalanceMetric) -> Vec<Vec<SubgraphId>> {
    let items: Vec<(SubgraphId, u64)> = subgraphs.iter().map(|sg| (sg.id, metric.weight(sg))).collect();
    let assign = lpt(&items, bins);
    let mut out = vec![Vec::new(); bins.max(1)];
    for (i, b) in assign.into_iter().enumerate() {
        out[b].push(items[i].0);
    }
    for b in &mut out {
        b.sort_unstable();
    }
    out
}
