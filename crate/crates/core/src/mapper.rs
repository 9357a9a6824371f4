//! Noise-adaptive placement of logical qubits and SWAP routing.
//!
//! Placement is a deterministic greedy procedure:
//!
//! 1. Weight the logical interaction graph by two-qubit gate counts (a SWAP
//!    counts as three CX).
//! 2. Put the most-interacting logical pair on the device edge with the
//!    lowest CX error. The endpoint with more couplings receives the logical
//!    qubit with more interactions.
//! 3. Repeatedly take the unplaced logical qubit with the most interactions
//!    towards placed qubits, and put it on the free neighbour of the placed
//!    region that minimises `sum(path_error * path_length)` over its placed
//!    partners, where paths are minimum-error paths.
//!
//! Ties always go to the lowest index. Routing then walks the circuit and,
//! for each two-qubit gate on an uncoupled pair, swaps the first operand
//! along the minimum-error path until it neighbours the second.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use serde::Serialize;

use crate::circuit::{Circuit, Gate, Instruction};
use crate::error::{Result, ZneError};
use crate::noise_model::NoiseModel;

/// Injective map from logical to physical qubits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Layout {
    logical_to_physical: Vec<usize>,
    #[serde(skip)]
    physical_to_logical: BTreeMap<usize, usize>,
}

impl Layout {
    pub fn new(logical_to_physical: Vec<usize>) -> Result<Self> {
        let mut physical_to_logical = BTreeMap::new();
        for (l, &p) in logical_to_physical.iter().enumerate() {
            if physical_to_logical.insert(p, l).is_some() {
                return Err(ZneError::InvalidArgument(format!(
                    "layout maps two logical qubits onto physical {p}"
                )));
            }
        }
        Ok(Self {
            logical_to_physical,
            physical_to_logical,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::new((0..n).collect()).expect("identity is injective")
    }

    pub fn physical(&self, logical: usize) -> usize {
        self.logical_to_physical[logical]
    }

    pub fn logical(&self, physical: usize) -> Option<usize> {
        self.physical_to_logical.get(&physical).copied()
    }

    pub fn len(&self) -> usize {
        self.logical_to_physical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logical_to_physical.is_empty()
    }

    /// `(logical, physical)` pairs in logical order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.logical_to_physical.iter().copied().enumerate().collect()
    }

    /// Exchanges whatever occupies physical qubits `a` and `b`.
    fn swap_physical(&mut self, a: usize, b: usize) {
        let la = self.physical_to_logical.remove(&a);
        let lb = self.physical_to_logical.remove(&b);
        if let Some(l) = la {
            self.logical_to_physical[l] = b;
            self.physical_to_logical.insert(b, l);
        }
        if let Some(l) = lb {
            self.logical_to_physical[l] = a;
            self.physical_to_logical.insert(a, l);
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Cost {
    error: f64,
    hops: usize,
}

impl PartialEq for Cost {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then(self.hops.cmp(&other.hops))
    }
}

/// All-pairs minimum-error paths over the coupling graph (edge weight =
/// symmetric CX error, ties broken by hop count).
#[derive(Debug, Clone)]
pub struct PathFinder {
    n: usize,
    cost: Vec<Option<Cost>>,
    prev: Vec<Option<usize>>,
}

impl PathFinder {
    pub fn new(model: &NoiseModel) -> Self {
        let n = model.num_qubits();
        let adj: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|q| {
                model
                    .neighbors(q)
                    .into_iter()
                    .map(|k| (k, model.error(q, k).expect("neighbour is coupled")))
                    .collect()
            })
            .collect();
        let mut cost = vec![None; n * n];
        let mut prev = vec![None; n * n];
        for src in 0..n {
            let row = src * n;
            let mut heap = BinaryHeap::new();
            cost[row + src] = Some(Cost { error: 0.0, hops: 0 });
            heap.push(Reverse((Cost { error: 0.0, hops: 0 }, src)));
            while let Some(Reverse((c, u))) = heap.pop() {
                if cost[row + u].is_some_and(|best| c > best) {
                    continue;
                }
                for &(v, w) in &adj[u] {
                    let next = Cost {
                        error: c.error + w,
                        hops: c.hops + 1,
                    };
                    if cost[row + v].is_none_or(|best| next < best) {
                        cost[row + v] = Some(next);
                        prev[row + v] = Some(u);
                        heap.push(Reverse((next, v)));
                    }
                }
            }
        }
        Self { n, cost, prev }
    }

    /// `(summed error, hop count)` of the minimum-error path.
    pub fn cost(&self, from: usize, to: usize) -> Option<(f64, usize)> {
        self.cost[from * self.n + to].map(|c| (c.error, c.hops))
    }

    /// Node sequence from `from` to `to`, both inclusive.
    pub fn path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        self.cost(from, to)?;
        let mut path = vec![to];
        let mut cur = to;
        while cur != from {
            cur = self.prev[from * self.n + cur]?;
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }
}

fn interaction_weights(circuit: &Circuit) -> BTreeMap<(usize, usize), usize> {
    let mut w = BTreeMap::new();
    for g in circuit.gates() {
        let weight = match g {
            Gate::Cx(..) => 1,
            Gate::Swap(..) => 3,
            _ => continue,
        };
        let pair = g.pair().expect("two-qubit gate");
        *w.entry(pair).or_insert(0) += weight;
    }
    w
}

pub fn noise_adaptive_layout(circuit: &Circuit, model: &NoiseModel) -> Result<Layout> {
    let n = circuit.num_qubits();
    let device = model.num_qubits();
    if n > device {
        return Err(ZneError::DeviceTooSmall {
            needed: n,
            available: device,
        });
    }
    let weights = interaction_weights(circuit);
    let mut total = vec![0usize; n];
    let mut partners: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); n];
    for (&(a, b), &w) in &weights {
        total[a] += w;
        total[b] += w;
        partners[a].insert(b, w);
        partners[b].insert(a, w);
    }

    let paths = PathFinder::new(model);
    let mut assigned: Vec<Option<usize>> = vec![None; n];
    let mut used = BTreeSet::new();
    let by_one_qubit_error = |a: &usize, b: &usize| {
        model
            .one_qubit_error(*a)
            .total_cmp(&model.one_qubit_error(*b))
            .then(a.cmp(b))
    };

    let seed_edge = model.edges().into_iter().min_by(|a, b| {
        let ea = model.error(a.0, a.1).expect("edge");
        let eb = model.error(b.0, b.1).expect("edge");
        ea.total_cmp(&eb).then(a.cmp(b))
    });
    let seed_pair = weights
        .iter()
        .max_by(|(pa, wa), (pb, wb)| wa.cmp(wb).then(pb.cmp(pa)))
        .map(|(&p, _)| p);

    match (seed_edge, seed_pair) {
        (Some((p0, p1)), Some((l0, l1))) => {
            let mut logicals = [l0, l1];
            logicals.sort_by(|a, b| total[*b].cmp(&total[*a]).then(a.cmp(b)));
            let mut physicals = [p0, p1];
            let degree = |q: usize| model.neighbors(q).len();
            physicals.sort_by(|a, b| degree(*b).cmp(&degree(*a)).then(a.cmp(b)));
            for (l, p) in logicals.into_iter().zip(physicals) {
                assigned[l] = Some(p);
                used.insert(p);
            }
        }
        _ => {
            // No two-qubit interaction (or no couplings): start from the
            // qubit with the lowest one-qubit error.
            let p = (0..device)
                .min_by(by_one_qubit_error)
                .expect("device has at least one qubit");
            assigned[0] = Some(p);
            used.insert(p);
        }
    }

    while let Some(next) = (0..n)
        .filter(|&l| assigned[l].is_none())
        .max_by(|&a, &b| {
            let towards_placed = |l: usize| -> usize {
                partners[l]
                    .iter()
                    .filter(|(p, _)| assigned[**p].is_some())
                    .map(|(_, w)| w)
                    .sum()
            };
            towards_placed(a)
                .cmp(&towards_placed(b))
                .then(total[a].cmp(&total[b]))
                .then(b.cmp(&a))
        })
    {
        let frontier: BTreeSet<usize> = used
            .iter()
            .flat_map(|&p| model.neighbors(p))
            .filter(|p| !used.contains(p))
            .collect();
        let candidates: Vec<usize> = if frontier.is_empty() {
            (0..device).filter(|p| !used.contains(p)).collect()
        } else {
            frontier.into_iter().collect()
        };
        let placed_partners: Vec<usize> = partners[next]
            .keys()
            .filter_map(|&l| assigned[l])
            .collect();

        let chosen = if placed_partners.is_empty() {
            candidates.iter().copied().min_by(by_one_qubit_error)
        } else {
            let score = |cand: usize| -> Option<f64> {
                placed_partners.iter().try_fold(0.0, |acc, &p| {
                    let (err, hops) = paths.cost(cand, p)?;
                    Some(acc + err * hops as f64)
                })
            };
            candidates
                .iter()
                .filter_map(|&c| score(c).map(|s| (c, s)))
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                .map(|(c, _)| c)
                .or_else(|| candidates.iter().copied().min_by(by_one_qubit_error))
        };
        let p = chosen.ok_or(ZneError::DeviceTooSmall {
            needed: n,
            available: device,
        })?;
        assigned[next] = Some(p);
        used.insert(p);
    }

    Layout::new(assigned.into_iter().map(|p| p.expect("all placed")).collect())
}

/// A circuit expressed on device qubits.
#[derive(Debug, Clone)]
pub struct Routed {
    /// Circuit over the full device register.
    pub circuit: Circuit,
    pub initial: Layout,
    /// Where each logical qubit sits after the last gate; measurements are
    /// read through this map.
    pub final_layout: Layout,
    pub swaps: usize,
}

pub fn route(circuit: &Circuit, layout: &Layout, model: &NoiseModel) -> Result<Routed> {
    let device = model.num_qubits();
    if layout.len() != circuit.num_qubits() {
        return Err(ZneError::InvalidArgument(format!(
            "layout covers {} qubits, circuit has {}",
            layout.len(),
            circuit.num_qubits()
        )));
    }
    if let Some(&(_, p)) = layout.pairs().iter().find(|(_, p)| *p >= device) {
        return Err(ZneError::QubitOutOfRange {
            qubit: p,
            num_qubits: device,
        });
    }
    let paths = PathFinder::new(model);
    let mut current = layout.clone();
    let mut out = Circuit::new(device)?;
    let mut swaps = 0;

    for op in circuit.instructions() {
        let gate = match op.gate {
            Gate::Cx(a, b) | Gate::Swap(a, b) => {
                let (pa, pb) = (current.physical(a), current.physical(b));
                if !model.is_coupled(pa, pb) {
                    let path = paths.path(pa, pb).ok_or(ZneError::Unroutable(pa, pb))?;
                    for w in path[..path.len() - 1].windows(2) {
                        out.push(Gate::Swap(w[0], w[1]))?;
                        current.swap_physical(w[0], w[1]);
                        swaps += 1;
                    }
                }
                op.gate.map_qubits(|l| current.physical(l))
            }
            g => g.map_qubits(|l| current.physical(l)),
        };
        out.push_instruction(Instruction { gate, ..*op })?;
    }

    Ok(Routed {
        circuit: out,
        initial: layout.clone(),
        final_layout: current,
        swaps,
    })
}

/// A routed circuit restricted to the device qubits it touches, relabelled
/// to a compact register so it can be simulated.
#[derive(Debug, Clone)]
pub struct MappedCircuit {
    pub circuit: Circuit,
    /// Calibration restricted and relabelled to the compact register.
    pub model: NoiseModel,
    /// `physical[c]` is the device qubit behind compact qubit `c`.
    pub physical: Vec<usize>,
    pub initial: Layout,
    pub final_layout: Layout,
    pub swaps: usize,
}

impl MappedCircuit {
    fn compact(routed: Routed, model: &NoiseModel) -> Result<Self> {
        let mut touched: BTreeSet<usize> = routed.initial.pairs().into_iter().map(|(_, p)| p).collect();
        touched.extend(routed.circuit.gates().flat_map(|g| g.qubits()));
        let physical: Vec<usize> = touched.into_iter().collect();
        let mut index = vec![usize::MAX; model.num_qubits()];
        for (c, &p) in physical.iter().enumerate() {
            index[p] = c;
        }
        let circuit = routed.circuit.relabel(physical.len(), &index)?;
        Ok(Self {
            circuit,
            model: model.restrict(&physical),
            physical,
            initial: routed.initial,
            final_layout: routed.final_layout,
            swaps: routed.swaps,
        })
    }

    /// Compact register index holding each logical qubit at measurement.
    pub fn readout_positions(&self) -> Vec<usize> {
        self.final_layout
            .pairs()
            .into_iter()
            .map(|(_, p)| {
                self.physical
                    .binary_search(&p)
                    .expect("final positions are part of the compact register")
            })
            .collect()
    }

    pub fn num_logical(&self) -> usize {
        self.initial.len()
    }
}

/// Places, routes and compacts `circuit` for `model`.
pub fn map_circuit(circuit: &Circuit, model: &NoiseModel) -> Result<MappedCircuit> {
    let layout = noise_adaptive_layout(circuit, model)?;
    let routed = route(circuit, &layout, model)?;
    MappedCircuit::compact(routed, model)
}

/// Accepts a circuit already written on device qubits (identity layout).
/// Every two-qubit gate must act on a coupled pair.
pub fn premapped(circuit: &Circuit, model: &NoiseModel) -> Result<MappedCircuit> {
    if circuit.num_qubits() > model.num_qubits() {
        return Err(ZneError::DeviceTooSmall {
            needed: circuit.num_qubits(),
            available: model.num_qubits(),
        });
    }
    for g in circuit.gates() {
        if let Some((a, b)) = g.pair() {
            if !model.is_coupled(a, b) {
                return Err(ZneError::NonConformant(a, b));
            }
        }
    }
    let layout = Layout::identity(circuit.num_qubits());
    let routed = Routed {
        circuit: circuit.relabel(model.num_qubits(), &(0..circuit.num_qubits()).collect::<Vec<_>>())?,
        initial: layout.clone(),
        final_layout: layout,
        swaps: 0,
    };
    MappedCircuit::compact(routed, model)
}
