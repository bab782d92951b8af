use std::fmt;

use crate::model::ProtocolModel;
use crate::symbol::SymbolId;

pub type RouterId = usize;

/// Canonical global state: per-symbol router counts in alphabet order.
/// Two ordered states with equal counts are counting-equivalent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GlobalState {
    counts: Vec<u16>,
}

impl GlobalState {
    pub fn empty(alphabet_len: usize) -> Self {
        GlobalState {
            counts: vec![0; alphabet_len],
        }
    }

    pub fn from_counts(counts: Vec<u16>) -> Self {
        GlobalState { counts }
    }

    /// Build from a bag of symbols.
    pub fn from_symbols(alphabet_len: usize, syms: &[SymbolId]) -> Self {
        let mut g = GlobalState::empty(alphabet_len);
        for &s in syms {
            g.counts[s] += 1;
        }
        g
    }

    pub fn count(&self, s: SymbolId) -> u16 {
        self.counts[s]
    }

    pub fn counts(&self) -> &[u16] {
        &self.counts
    }

    pub fn routers(&self) -> usize {
        self.counts.iter().map(|&c| c as usize).sum()
    }

    /// Distinct symbols present, in canonical order.
    pub fn present(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(s, _)| s)
    }

    pub fn contains_all(&self, other: &GlobalState) -> bool {
        self.counts
            .iter()
            .zip(&other.counts)
            .all(|(a, b)| a >= b)
    }

    /// Replace one instance of `from` with `to`.
    pub fn replace_one(&self, from: SymbolId, to: SymbolId) -> GlobalState {
        debug_assert!(self.counts[from] > 0);
        let mut g = self.clone();
        g.counts[from] -= 1;
        g.counts[to] += 1;
        g
    }

    /// `{F:1,NH:2}` form, symbols in canonical order, zero counts omitted.
    pub fn display(&self, model: &ProtocolModel) -> String {
        let parts: Vec<String> = self
            .present()
            .map(|s| format!("{}:{}", model.states[s].name, self.counts[s]))
            .collect();
        format!("{{{}}}", parts.join(","))
    }
}

impl fmt::Display for GlobalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.counts)
    }
}

/// Router-indexed global state, used wherever actors matter (stepping the
/// machine, traces). Canonical form is its symbol histogram.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrderedState {
    syms: Vec<SymbolId>,
}

impl OrderedState {
    pub fn new(syms: Vec<SymbolId>) -> Self {
        OrderedState { syms }
    }

    /// Lowest-index router for each symbol of a canonical state, in canonical
    /// symbol order. The deterministic ordered representative.
    pub fn representative(g: &GlobalState) -> Self {
        let mut syms = Vec::with_capacity(g.routers());
        for s in g.present() {
            for _ in 0..g.count(s) {
                syms.push(s);
            }
        }
        OrderedState { syms }
    }

    pub fn len(&self) -> usize {
        self.syms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syms.is_empty()
    }

    pub fn get(&self, r: RouterId) -> SymbolId {
        self.syms[r]
    }

    pub fn set(&mut self, r: RouterId, s: SymbolId) {
        self.syms[r] = s;
    }

    pub fn symbols(&self) -> &[SymbolId] {
        &self.syms
    }

    pub fn routers(&self) -> impl Iterator<Item = RouterId> {
        0..self.syms.len()
    }

    /// First router currently in `sym`, if any.
    pub fn find(&self, sym: SymbolId) -> Option<RouterId> {
        self.syms.iter().position(|&s| s == sym)
    }

    pub fn canonical(&self, alphabet_len: usize) -> GlobalState {
        GlobalState::from_symbols(alphabet_len, &self.syms)
    }

    pub fn display(&self, model: &ProtocolModel) -> String {
        let parts: Vec<String> = self
            .syms
            .iter()
            .map(|&s| model.states[s].name.clone())
            .collect();
        format!("[{}]", parts.join(","))
    }
}

/// Multiset canonical form of an ordered state; idempotent and independent of
/// router order.
pub fn canonicalize(model: &ProtocolModel, g: &OrderedState) -> GlobalState {
    g.canonical(model.states.len())
}
