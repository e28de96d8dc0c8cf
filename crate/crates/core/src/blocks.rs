//! Block partitions of concrete planar matchings: the greedy construction,
//! type extraction, short/regular classification, and block enlargement.
//!
//! A partition cuts a matching into blocks of consecutive edges, each holding
//! at most `e_max` edges and spread over at most `ell` consecutive nodes in
//! either class, where spread is measured as the node-index difference
//! `a_last - a_first` (and likewise for b).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::solvers::PlanarMatching;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockLabel {
    /// The last block, or a block with `edge_count == e_max`.
    Short,
    Regular,
}

/// One block of consecutive matching edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Block {
    pub a_first: u32,
    pub a_last: u32,
    pub b_first: u32,
    pub b_last: u32,
    pub edge_count: u32,
    /// Filled by [`classify_and_enlarge`].
    pub label: Option<BlockLabel>,
    /// Enlarged window sizes `(r_bar, s_bar)`, filled by [`classify_and_enlarge`].
    pub enlarged: Option<(u32, u32)>,
}

impl Block {
    /// Node-index spread on the A side.
    pub fn a_spread(&self) -> u32 {
        self.a_last - self.a_first
    }

    /// Node-index spread on the B side.
    pub fn b_spread(&self) -> u32 {
        self.b_last - self.b_first
    }
}

/// A partition of a planar matching into blocks of consecutive edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockPartition {
    blocks: Vec<Block>,
    ell: u32,
    e_max: u32,
}

impl BlockPartition {
    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn q(&self) -> usize {
        self.blocks.len()
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn e_max(&self) -> u32 {
        self.e_max
    }

    /// Total number of matching edges covered.
    pub fn edge_total(&self) -> u64 {
        self.blocks.iter().map(|b| b.edge_count as u64).sum()
    }

    /// Line-oriented text form: one block per line,
    /// `a_first a_last b_first b_last e_i label r_bar s_bar`,
    /// with `-` for fields not yet filled.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for b in &self.blocks {
            let label = match b.label {
                Some(BlockLabel::Short) => "short",
                Some(BlockLabel::Regular) => "regular",
                None => "-",
            };
            let (rb, sb) = match b.enlarged {
                Some((r, s)) => (r.to_string(), s.to_string()),
                None => ("-".into(), "-".into()),
            };
            out.push_str(&format!(
                "{} {} {} {} {} {} {} {}\n",
                b.a_first, b.a_last, b.b_first, b.b_last, b.edge_count, label, rb, sb
            ));
        }
        out
    }
}

/// Greedy block construction: each block starts at the edge after the
/// previous block's last edge and extends to the rightmost edge keeping the
/// edge count at most `e_max` and both spreads at most `ell`. The empty
/// matching yields the empty partition.
pub fn build_block_partition(m: &PlanarMatching, ell: u32, e_max: u32) -> Result<BlockPartition> {
    if ell == 0 {
        return Err(Error::param("ell", "must be at least 1"));
    }
    if e_max == 0 {
        return Err(Error::param("e_max", "must be at least 1"));
    }
    let edges = m.edges();
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < edges.len() {
        let (a0, b0) = edges[i];
        let mut j = i + 1;
        while j < edges.len() {
            let (a, b) = edges[j];
            if (j - i) as u32 >= e_max || a - a0 > ell || b - b0 > ell {
                break;
            }
            j += 1;
        }
        let (a1, b1) = edges[j - 1];
        blocks.push(Block {
            a_first: a0,
            a_last: a1,
            b_first: b0,
            b_last: b1,
            edge_count: (j - i) as u32,
            label: None,
            enlarged: None,
        });
        i = j;
    }
    Ok(BlockPartition { blocks, ell, e_max })
}

/// The 5q-tuple `(a_1, a'_1, b_1, b'_1, e_1, ..., e_q)` identifying the
/// partition. Two matchings with equal tuples are type-equal.
pub fn type_of(p: &BlockPartition) -> Vec<u32> {
    let mut t = Vec::with_capacity(5 * p.q());
    for b in &p.blocks {
        t.extend_from_slice(&[b.a_first, b.a_last, b.b_first, b.b_last, b.edge_count]);
    }
    t
}

/// Summary produced alongside an enlarged partition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnlargementReport {
    /// Number of short blocks, |S|.
    pub short_count: usize,
    /// `(|S| - 1) * e_max <= |M|`; holds by construction.
    pub short_edge_bound_ok: bool,
    /// `|S| <= 2 delta n / ell`, checked only when
    /// `e_max >= (1/delta)(ell/n)|M| - 1` holds for this instance.
    pub short_count_bound: Option<bool>,
    pub sum_r_bar: u64,
    pub sum_s_bar: u64,
}

/// Label blocks short/regular and fill the enlarged window sizes.
///
/// Short blocks get an `ell x ell` window. A regular block whose successor
/// starts at least `ell` away on the A side gets `(ell, max(ceil(delta ell),
/// b-spread))`, and symmetrically otherwise. `host_n` is the size of each
/// color class of the graph the matching lives on.
pub fn classify_and_enlarge(
    p: &BlockPartition,
    delta: f64,
    host_n: u32,
) -> Result<(BlockPartition, EnlargementReport)> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::param("delta", "must lie in (0, 1)"));
    }
    if let Some(last) = p.blocks.last() {
        if last.a_last > host_n || last.b_last > host_n {
            return Err(Error::param("host_n", "smaller than the matching's span"));
        }
    }
    let ell = p.ell;
    let delta_ell = (delta * ell as f64).ceil() as u32;
    let q = p.q();
    let mut blocks = p.blocks.clone();
    let mut short_count = 0usize;
    for i in 0..q {
        let short = i == q - 1 || blocks[i].edge_count == p.e_max;
        if short {
            short_count += 1;
            blocks[i].label = Some(BlockLabel::Short);
            blocks[i].enlarged = Some((ell, ell));
        } else {
            blocks[i].label = Some(BlockLabel::Regular);
            let gap_a = blocks[i + 1].a_first - blocks[i].a_first;
            let (r_bar, s_bar) = if gap_a >= ell {
                (ell, delta_ell.max(blocks[i].b_spread()))
            } else {
                (delta_ell.max(blocks[i].a_spread()), ell)
            };
            blocks[i].enlarged = Some((r_bar, s_bar));
        }
    }

    let edge_total: u64 = blocks.iter().map(|b| b.edge_count as u64).sum();
    let short_edge_bound_ok =
        (short_count as u64).saturating_sub(1) * p.e_max as u64 <= edge_total;
    let precondition =
        p.e_max as f64 >= (1.0 / delta) * (ell as f64 / host_n as f64) * edge_total as f64 - 1.0;
    let short_count_bound = if precondition && q > 0 {
        Some(short_count as f64 <= 2.0 * delta * host_n as f64 / ell as f64)
    } else {
        None
    };
    let sum_r_bar = blocks.iter().map(|b| b.enlarged.unwrap().0 as u64).sum();
    let sum_s_bar = blocks.iter().map(|b| b.enlarged.unwrap().1 as u64).sum();

    Ok((
        BlockPartition {
            blocks,
            ell: p.ell,
            e_max: p.e_max,
        },
        EnlargementReport {
            short_count,
            short_edge_bound_ok,
            short_count_bound,
            sum_r_bar,
            sum_s_bar,
        },
    ))
}
