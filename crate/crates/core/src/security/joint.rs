//! A weighted ensemble of pure joint states ("worlds") over reference, client
//! and server wires. Every world shares the same wire layout; measurements and
//! client coin flips split worlds instead of sampling, unless the ensemble was
//! created in sampling mode.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha20Rng;

use super::SecurityError;
use crate::engine::{client_rng, server_rng};
use crate::keytrack::KeyRegister;
use crate::par::{self, Execution};
use crate::qcore::{measure_branches, measure_sample, Matrix, StateVector, IMPOSSIBLE, MAX_WIRES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Owner {
    Reference,
    Client,
    Server,
}

/// Stable wire handle; positions shift as wires are dropped, ids do not.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WireId(usize);

/// Where a classical bit lands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sink {
    /// The server's classical record (part of its output).
    Record,
    /// Client-private memory.
    Client,
}

#[derive(Clone, Debug, Default)]
pub struct ClientMemory {
    pub bits: Vec<bool>,
    pub keys: KeyRegister,
    /// Decoded measurement outcome per circuit wire.
    pub plain: BTreeMap<usize, bool>,
}

#[derive(Clone, Debug)]
pub struct World {
    pub probability: f64,
    pub state: StateVector,
    pub record: Vec<bool>,
    pub client: ClientMemory,
}

#[derive(Clone, Debug)]
struct Sampler {
    client: ChaCha20Rng,
    server: ChaCha20Rng,
}

#[derive(Clone, Debug)]
pub struct Joint {
    layout: Vec<(WireId, Owner)>,
    next_id: usize,
    worlds: Vec<World>,
    exec: Execution,
    sampler: Option<Sampler>,
    peak_wires: usize,
}

impl Joint {
    /// One world, no wires.
    pub fn new(exec: Execution) -> Self {
        Self {
            layout: Vec::new(),
            next_id: 0,
            worlds: vec![World {
                probability: 1.0,
                state: StateVector::basis(0, 0).expect("empty register"),
                record: Vec::new(),
                client: ClientMemory::default(),
            }],
            exec,
            sampler: None,
            peak_wires: 0,
        }
    }

    /// A single trajectory: coin flips and measurements are drawn from
    /// generators seeded by `seed`.
    pub fn sampling(seed: u64) -> Self {
        let mut j = Self::new(Execution::Sequential);
        j.sampler = Some(Sampler {
            client: client_rng(seed),
            server: server_rng(seed),
        });
        j
    }

    pub fn worlds(&self) -> &[World] {
        &self.worlds
    }

    pub fn num_wires(&self) -> usize {
        self.layout.len()
    }

    pub fn peak_wires(&self) -> usize {
        self.peak_wires
    }

    pub fn position(&self, id: WireId) -> usize {
        self.layout
            .iter()
            .position(|(w, _)| *w == id)
            .unwrap_or_else(|| panic!("wire {id:?} no longer exists"))
    }

    pub fn owner(&self, id: WireId) -> Owner {
        self.layout[self.position(id)].1
    }

    pub fn transfer(&mut self, id: WireId, owner: Owner) {
        let p = self.position(id);
        self.layout[p].1 = owner;
    }

    /// Appends fresh wires prepared in `state` to every world, in order.
    pub fn alloc_state(
        &mut self,
        owner: Owner,
        state: &StateVector,
    ) -> Result<Vec<WireId>, SecurityError> {
        let n = self.layout.len() + state.num_wires();
        if n > MAX_WIRES {
            return Err(SecurityError::TooManyWires(n));
        }
        let ids: Vec<WireId> = (0..state.num_wires())
            .map(|i| WireId(self.next_id + i))
            .collect();
        self.next_id += ids.len();
        self.layout.extend(ids.iter().map(|&id| (id, owner)));
        self.peak_wires = self.peak_wires.max(self.layout.len());
        self.worlds = par::map_collect(self.exec, &self.worlds, |w| World {
            state: w.state.tensor(state),
            ..w.clone()
        });
        Ok(ids)
    }

    pub fn alloc(&mut self, owner: Owner, qubit: &StateVector) -> Result<WireId, SecurityError> {
        debug_assert_eq!(qubit.num_wires(), 1);
        Ok(self.alloc_state(owner, qubit)?[0])
    }

    pub fn alloc_zero(&mut self, owner: Owner) -> Result<WireId, SecurityError> {
        self.alloc(owner, &StateVector::basis(1, 0).expect("one wire"))
    }

    /// `(|00⟩ + |11⟩)/√2` on two new wires.
    pub fn alloc_epr(
        &mut self,
        first: Owner,
        second: Owner,
    ) -> Result<(WireId, WireId), SecurityError> {
        let a = self.alloc_zero(first)?;
        let b = self.alloc_zero(second)?;
        self.apply(crate::qcore::Gate::H.matrix().matrix(), &[a]);
        self.apply(crate::qcore::Gate::Cnot.matrix().matrix(), &[a, b]);
        Ok((a, b))
    }

    pub fn apply(&mut self, matrix: &Matrix, wires: &[WireId]) {
        self.apply_with(wires, |_| Some(matrix.clone()));
    }

    /// Applies a per-world gate; `None` leaves the world untouched.
    pub fn apply_with<F>(&mut self, wires: &[WireId], gate: F)
    where
        F: Fn(&World) -> Option<Matrix> + Sync + Send,
    {
        let pos: Vec<usize> = wires.iter().map(|&w| self.position(w)).collect();
        let worlds = std::mem::take(&mut self.worlds);
        self.worlds = par::flat_map_collect(self.exec, worlds, |mut w| {
            if let Some(m) = gate(&w) {
                w.state.apply_matrix_mut(&m, &pos);
            }
            vec![w]
        });
    }

    /// Updates client memory in every world.
    pub fn update_client<F>(&mut self, f: F) -> Result<(), SecurityError>
    where
        F: Fn(&mut World) -> Result<(), SecurityError> + Sync + Send,
    {
        let worlds = std::mem::take(&mut self.worlds);
        let out: Vec<Result<World, SecurityError>> =
            par::flat_map_collect(self.exec, worlds, |mut w| vec![f(&mut w).map(|_| w)]);
        self.worlds = out.into_iter().collect::<Result<_, _>>()?;
        Ok(())
    }

    /// Splits every world into `2^k` equally weighted copies, one per value of
    /// `k` fresh uniform bits appended to `sink`. Returns the index of the first
    /// new bit.
    pub fn flip_coins(&mut self, k: usize, sink: Sink) -> usize {
        let first = self.sink_len(sink);
        if let Some(s) = self.sampler.as_mut() {
            let bits: Vec<bool> = (0..k).map(|_| s.client.random()).collect();
            for w in &mut self.worlds {
                push_bits(w, sink, &bits);
            }
            return first;
        }
        let weight = 1.0 / (1u64 << k) as f64;
        let worlds = std::mem::take(&mut self.worlds);
        self.worlds = par::flat_map_collect(self.exec, worlds, |w| {
            (0..1usize << k)
                .map(|v| {
                    let bits: Vec<bool> = (0..k).map(|i| v >> (k - 1 - i) & 1 == 1).collect();
                    let mut c = w.clone();
                    c.probability *= weight;
                    push_bits(&mut c, sink, &bits);
                    c
                })
                .collect()
        });
        first
    }

    /// Appends a bit computed per world (e.g. a classical message).
    pub fn push_bit<F>(&mut self, sink: Sink, f: F) -> usize
    where
        F: Fn(&World) -> bool + Sync + Send,
    {
        let first = self.sink_len(sink);
        let worlds = std::mem::take(&mut self.worlds);
        self.worlds = par::flat_map_collect(self.exec, worlds, |mut w| {
            let b = f(&w);
            push_bits(&mut w, sink, &[b]);
            vec![w]
        });
        first
    }

    fn sink_len(&self, sink: Sink) -> usize {
        self.worlds.first().map_or(0, |w| match sink {
            Sink::Record => w.record.len(),
            Sink::Client => w.client.bits.len(),
        })
    }

    /// Computational-basis measurement. With `keep` the collapsed wire stays in
    /// the layout; otherwise it is dropped. Returns the index of the outcome bit.
    pub fn measure(&mut self, id: WireId, sink: Sink, keep: bool) -> Result<usize, SecurityError> {
        let pos = self.position(id);
        let first = self.sink_len(sink);
        let worlds = std::mem::take(&mut self.worlds);
        let finish =
            |mut w: World, bit: bool, p: f64, post: StateVector| -> Result<World, SecurityError> {
                w.probability *= p;
                w.state = if keep {
                    post
                } else {
                    post.remove_collapsed_wire(pos, bit)?
                };
                push_bits(&mut w, sink, &[bit]);
                Ok(w)
            };
        let out: Vec<Result<World, SecurityError>> = if let Some(s) = self.sampler.as_mut() {
            worlds
                .into_iter()
                .map(|w| {
                    let (bit, post) = measure_sample(&w.state, pos, &mut s.server)?;
                    finish(w, bit, 1.0, post)
                })
                .collect()
        } else {
            par::flat_map_collect(self.exec, worlds, |w| {
                match measure_branches(&w.state, pos) {
                    Err(e) => vec![Err(e.into())],
                    Ok(branches) => branches
                        .into_iter()
                        .filter(|b| b.probability >= IMPOSSIBLE)
                        .filter_map(|b| b.state.map(|s| (b.bit, b.probability, s)))
                        .map(|(bit, p, s)| finish(w.clone(), bit, p, s))
                        .collect(),
                }
            })
        };
        self.worlds = out.into_iter().collect::<Result<_, _>>()?;
        if !keep {
            self.layout.remove(pos);
        }
        Ok(first)
    }

    /// Sums `probability · ρ_keep` per classical key. The key function usually
    /// selects the server record.
    pub fn blocks<K>(
        &self,
        keep: &[WireId],
        key: K,
    ) -> Result<BTreeMap<Vec<bool>, Matrix>, SecurityError>
    where
        K: Fn(&World) -> Vec<bool> + Sync + Send,
    {
        let pos: Vec<usize> = keep.iter().map(|&w| self.position(w)).collect();
        let parts: Vec<Result<_, SecurityError>> = par::map_collect(self.exec, &self.worlds, |w| {
            Ok((key(w), w.probability, w.state.reduced_density(&pos)?))
        });
        let mut out: BTreeMap<Vec<bool>, Matrix> = BTreeMap::new();
        let dim = 1usize << keep.len();
        for part in parts {
            let (k, p, rho) = part?;
            out.entry(k)
                .or_insert_with(|| Matrix::zeros(dim))
                .add_assign_scaled(&rho, p);
        }
        Ok(out)
    }

    pub fn wires_owned_by(&self, owner: Owner) -> Vec<WireId> {
        self.layout
            .iter()
            .filter(|(_, o)| *o == owner)
            .map(|(w, _)| *w)
            .collect()
    }
}

fn push_bits(w: &mut World, sink: Sink, bits: &[bool]) {
    match sink {
        Sink::Record => w.record.extend_from_slice(bits),
        Sink::Client => w.client.bits.extend_from_slice(bits),
    }
}
