//! Round and space accounting for bulk MPC primitives.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::config::AlgorithmConfig;
use crate::error::{Error, Result};

/// Primitive names known to the default cost table.
pub mod prim {
    pub const SORT: &str = "sort";
    pub const PRAM: &str = "pram";
    pub const BROADCAST: &str = "broadcast";
    pub const DUPLICATE: &str = "duplicate";
    pub const PREDECESSOR: &str = "predecessor";
    pub const INDEX_IN_SETS: &str = "index_in_sets";
    pub const PREFIX_SUM_IN_SETS: &str = "prefix_sum_in_sets";
    pub const JL_PROJECT: &str = "jl_project";
    pub const SPANNER: &str = "spanner";
    pub const LEADER_COMPRESSION_ROUND: &str = "leader_compression_round";
    pub const SEQUENCE_INSERT: &str = "sequence_insert";
    pub const POINTER_JUMP: &str = "pointer_jump";

    pub const ALL: [&str; 12] = [
        SORT,
        PRAM,
        BROADCAST,
        DUPLICATE,
        PREDECESSOR,
        INDEX_IN_SETS,
        PREFIX_SUM_IN_SETS,
        JL_PROJECT,
        SPANNER,
        LEADER_COMPRESSION_ROUND,
        SEQUENCE_INSERT,
        POINTER_JUMP,
    ];
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostTable {
    pub costs: BTreeMap<String, u64>,
}

impl Default for CostTable {
    fn default() -> Self {
        let costs = prim::ALL
            .iter()
            .map(|&p| (p.to_string(), if p == prim::LEADER_COMPRESSION_ROUND { 3 } else { 1 }))
            .collect();
        CostTable { costs }
    }
}

impl CostTable {
    pub fn cost(&self, primitive: &str) -> Result<u64> {
        self.costs
            .get(primitive)
            .copied()
            .ok_or_else(|| Error::invalid(format!("unknown primitive `{primitive}`")))
    }

    pub fn with_cost(mut self, primitive: &str, cost: u64) -> Result<Self> {
        if cost == 0 {
            return Err(Error::invalid("primitive costs must be at least 1"));
        }
        self.cost(primitive)?;
        self.costs.insert(primitive.to_string(), cost);
        Ok(self)
    }

    fn c(&self, primitive: &str) -> u64 {
        self.costs[primitive]
    }
}

/// A bulk operand that cannot be laid out on machines of the configured size.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryViolation {
    pub stage: String,
    pub primitive: String,
    pub record_words: u64,
    pub machine_words: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundLedger {
    pub rounds: u64,
    pub total_space_words: u64,
    pub peak_machine_words: u64,
    /// Invocation counts, including every branch of a parallel group.
    pub per_primitive: BTreeMap<String, u64>,
    #[serde(skip)]
    costs: Arc<CostTable>,
    #[serde(skip)]
    machine_words: u64,
    #[serde(skip)]
    strict: bool,
    #[serde(skip)]
    pub violations: Vec<MemoryViolation>,
}

impl Default for RoundLedger {
    fn default() -> Self {
        RoundLedger::new(CostTable::default(), u64::MAX, false)
    }
}

impl RoundLedger {
    pub fn new(costs: CostTable, machine_words: u64, strict: bool) -> Self {
        RoundLedger {
            rounds: 0,
            total_space_words: 0,
            peak_machine_words: 0,
            per_primitive: BTreeMap::new(),
            costs: Arc::new(costs),
            machine_words: machine_words.max(1),
            strict,
            violations: Vec::new(),
        }
    }

    pub fn for_config(config: &AlgorithmConfig) -> Self {
        RoundLedger::new(CostTable::default(), config.machine_memory_s, config.strict_memory)
    }

    /// Empty ledger sharing this one's cost table and memory settings.
    pub fn child(&self) -> Self {
        RoundLedger {
            rounds: 0,
            total_space_words: 0,
            peak_machine_words: 0,
            per_primitive: BTreeMap::new(),
            costs: Arc::clone(&self.costs),
            machine_words: self.machine_words,
            strict: self.strict,
            violations: Vec::new(),
        }
    }

    pub fn costs(&self) -> &CostTable {
        &self.costs
    }

    pub fn charge(&mut self, primitive: &str, data_words: u64) -> Result<()> {
        let cost = self.costs.cost(primitive)?;
        self.rounds += cost;
        self.total_space_words = self.total_space_words.max(data_words);
        self.peak_machine_words = self.peak_machine_words.max(data_words.min(self.machine_words));
        *self.per_primitive.entry(primitive.to_string()).or_insert(0) += 1;
        Ok(())
    }

    /// Charges and, in strict mode, checks that records of `record_words` fit on one machine.
    pub fn charge_in(&mut self, stage: &str, primitive: &str, data_words: u64, record_words: u64) -> Result<()> {
        self.charge(primitive, data_words)?;
        if self.strict {
            if let Err(v) = strict_partition_check(data_words, record_words, self.machine_words) {
                self.violations.push(MemoryViolation {
                    stage: stage.to_string(),
                    primitive: primitive.to_string(),
                    ..v
                });
            }
        }
        Ok(())
    }

    /// Independent sub-ledgers run side by side: the slowest sets the rounds,
    /// their space adds up.
    pub fn parallel_group(&mut self, subs: Vec<RoundLedger>) {
        if subs.is_empty() {
            return;
        }
        self.rounds += subs.iter().map(|s| s.rounds).max().unwrap_or(0);
        let space: u64 = subs.iter().map(|s| s.total_space_words).sum();
        self.total_space_words = self.total_space_words.max(space);
        for s in subs {
            self.peak_machine_words = self.peak_machine_words.max(s.peak_machine_words);
            for (k, v) in s.per_primitive {
                *self.per_primitive.entry(k).or_insert(0) += v;
            }
            self.violations.extend(s.violations);
        }
    }

    /// Appends a ledger that ran after this one.
    pub fn then(&mut self, next: RoundLedger) {
        self.rounds += next.rounds;
        self.total_space_words = self.total_space_words.max(next.total_space_words);
        self.peak_machine_words = self.peak_machine_words.max(next.peak_machine_words);
        for (k, v) in next.per_primitive {
            *self.per_primitive.entry(k).or_insert(0) += v;
        }
        self.violations.extend(next.violations);
    }
}

/// Machines needed to hold `data_words` in chunks of `machine_words`, or a
/// violation when a single record does not fit.
pub fn strict_partition_check(data_words: u64, record_words: u64, machine_words: u64) -> std::result::Result<u64, MemoryViolation> {
    if record_words > machine_words {
        return Err(MemoryViolation {
            stage: String::new(),
            primitive: String::new(),
            record_words,
            machine_words,
        });
    }
    Ok(data_words.div_ceil(machine_words.max(1)))
}

/// Closed-form round count of the tree pipeline for `config`.
///
/// Preprocessing, then checkpoints in one parallel group, `g` sequential waves
/// of intermediate levels, and edge generation in one parallel group. Every
/// stage pays `h` compression rounds plus a fixed number of bulk steps, so the
/// total depends on `n` only through whether projection runs.
pub fn rounds_formula(config: &AlgorithmConfig, projected: bool, costs: &CostTable) -> u64 {
    let (sort, pram, bcast, dup) = (costs.c(prim::SORT), costs.c(prim::PRAM), costs.c(prim::BROADCAST), costs.c(prim::DUPLICATE));
    let compression = config.h as u64 * costs.c(prim::LEADER_COMPRESSION_ROUND);
    let jl = if projected { costs.c(prim::JL_PROJECT) } else { 0 };
    // bounds, broadcast bounds, rescale and snap, broadcast shift
    let normalize = sort + bcast + pram + bcast;
    // copy to levels, per-level (cell sort + build), copy upward, dedup
    let spanners = dup + (sort + costs.c(prim::SPANNER)) + dup + sort;
    let checkpoint = sort + pram + compression + pram + sort + pram + pram;
    let wave = dup + pram + compression + pram + sort + pram + pram;
    let edges = compression + sort + pram;
    let gather = sort;
    jl + normalize + spanners + checkpoint + config.g() as u64 * wave + edges + gather
}

/// Closed-form round count of tour assembly over `padded_levels` levels whose
/// base cluster trees have diameter at most `base_diameter`.
pub fn euler_rounds_formula(padded_levels: usize, base_diameter: usize, costs: &CostTable) -> u64 {
    let iterations = padded_levels.trailing_zeros() as u64;
    euler_base_rounds(base_diameter, costs) + iterations * (costs.c(prim::DUPLICATE) + join_rounds(costs))
}

pub(crate) fn euler_base_rounds(base_diameter: usize, costs: &CostTable) -> u64 {
    costs.c(prim::SORT) + pointer_jumps(base_diameter) * costs.c(prim::POINTER_JUMP)
}

pub(crate) fn pointer_jumps(diameter: usize) -> u64 {
    (usize::BITS - diameter.leading_zeros()) as u64 + 1
}

/// Bulk steps of one cluster-tour join, in execution order.
pub(crate) const JOIN_STEPS: [&str; 13] = [
    prim::SORT,               // pick root cluster, group tours
    prim::BROADCAST,          // root shift
    prim::PRAM,               // parents from first appearances
    prim::BROADCAST,          // terminals to children
    prim::SORT,               // child order by first appearance
    prim::INDEX_IN_SETS,      // sibling ranks
    prim::PREFIX_SUM_IN_SETS, // subtree sizes and offsets
    prim::PREFIX_SUM_IN_SETS, // root-to-node position sums
    prim::PRAM,               // place edges
    prim::PRAM,               // map through the edge map
    prim::PREDECESSOR,        // segment cluster tours
    prim::SORT,               // last appearances
    prim::SEQUENCE_INSERT,    // splice
];

pub(crate) fn join_rounds(costs: &CostTable) -> u64 {
    JOIN_STEPS.iter().map(|p| costs.c(p)).sum()
}
