//! Product basis states and reachable-subspace enumeration.
//!
//! A system with `N` qubits holds `N - 1` data qudits, each sitting in its own
//! resonator, plus the central qudit A that couples to every resonator. Tensor
//! factors are always ordered as (qudit 1, ..., qudit N-1, qudit A, mode 1,
//! ..., mode N-1), and serialized labels follow the same order:
//! `"f1 f2 sA | 0 0"`.
//!
//! The excitation number counts one for each qudit in `|e>`, one if qudit A is
//! in `|s>`, plus the total photon number. This convention is inferred from the
//! level patterns that appear in the invariant subspaces; it is conserved by the
//! Hamiltonian (drive `|s_A><e_A|` and couplings `a^dag |g><e|` both swap one
//! unit for another), which makes photon truncation at `n_max = 1` exact for
//! single-excitation dynamics.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest subspace `enumerate_reachable` builds unless told otherwise.
pub const DEFAULT_CAPACITY: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuditLevel {
    F = 0,
    S = 1,
    G = 2,
    E = 3,
}

impl QuditLevel {
    pub const ALL: [QuditLevel; 4] = [QuditLevel::F, QuditLevel::S, QuditLevel::G, QuditLevel::E];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn symbol(self) -> char {
        match self {
            QuditLevel::F => 'f',
            QuditLevel::S => 's',
            QuditLevel::G => 'g',
            QuditLevel::E => 'e',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            'f' => Some(QuditLevel::F),
            's' => Some(QuditLevel::S),
            'g' => Some(QuditLevel::G),
            'e' => Some(QuditLevel::E),
            _ => None,
        }
    }
}

impl fmt::Display for QuditLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Number of qubits and the per-mode photon truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemLayout {
    n_qubits: usize,
    n_max: u8,
}

impl SystemLayout {
    pub fn new(n_qubits: usize, n_max: u8) -> Result<Self> {
        if n_qubits < 2 {
            return Err(Error::InvalidLayout(format!(
                "need at least 2 qubits, got {n_qubits}"
            )));
        }
        if n_max < 1 {
            return Err(Error::InvalidLayout(
                "photon truncation must be at least 1".into(),
            ));
        }
        Ok(Self { n_qubits, n_max })
    }

    /// Layout with the default truncation of one photon per mode.
    pub fn with_qubits(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, 1)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_max(&self) -> u8 {
        self.n_max
    }

    /// Number of qudits, data qudits first and the central qudit last.
    pub fn n_qudits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_data(&self) -> usize {
        self.n_qubits - 1
    }

    pub fn n_modes(&self) -> usize {
        self.n_qubits - 1
    }

    /// Index of qudit A in `BasisState::levels`.
    pub fn central(&self) -> usize {
        self.n_qubits - 1
    }

    /// Site name used in labels: `1`, `2`, ... for data qudits and `A`.
    pub fn qudit_name(&self, qudit: usize) -> String {
        if qudit == self.central() {
            "A".to_string()
        } else {
            (qudit + 1).to_string()
        }
    }
}

/// One level per qudit and one occupation per resonator mode.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisState {
    pub levels: Vec<QuditLevel>,
    pub photons: Vec<u8>,
}

impl BasisState {
    pub fn new(levels: Vec<QuditLevel>, photons: Vec<u8>) -> Self {
        Self { levels, photons }
    }

    /// Builds a state from a compact level string such as `"ggs"` (data
    /// qudits then A) with all modes in vacuum.
    pub fn vacuum(layout: &SystemLayout, levels: &str) -> Result<Self> {
        let parsed: Option<Vec<_>> = levels.chars().map(QuditLevel::from_symbol).collect();
        let levels = parsed.ok_or_else(|| Error::InvalidState {
            state: levels.to_string(),
            reason: "unknown level symbol".into(),
        })?;
        let state = Self::new(levels, vec![0; layout.n_modes()]);
        state.validate(layout)?;
        Ok(state)
    }

    /// Parses the serialized form, e.g. `"f1 g2 sA | 1 0"`.
    pub fn parse(layout: &SystemLayout, label: &str) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidState {
            state: label.to_string(),
            reason: reason.to_string(),
        };
        let (qudits, modes) = label.split_once('|').ok_or_else(|| bad("missing '|'"))?;
        let mut levels = Vec::new();
        for (i, tok) in qudits.split_whitespace().enumerate() {
            let mut chars = tok.chars();
            let level = chars
                .next()
                .and_then(QuditLevel::from_symbol)
                .ok_or_else(|| bad("unknown level symbol"))?;
            if chars.as_str() != layout.qudit_name(i) {
                return Err(bad("qudit names out of order"));
            }
            levels.push(level);
        }
        let photons = modes
            .split_whitespace()
            .map(|t| t.parse::<u8>().map_err(|_| bad("bad photon number")))
            .collect::<Result<Vec<_>>>()?;
        let state = Self::new(levels, photons);
        state.validate(layout)?;
        Ok(state)
    }

    pub fn validate(&self, layout: &SystemLayout) -> Result<()> {
        if self.levels.len() != layout.n_qudits() {
            return Err(Error::InvalidState {
                state: format!("{self:?}"),
                reason: format!("expected {} qudit levels", layout.n_qudits()),
            });
        }
        if self.photons.len() != layout.n_modes() {
            return Err(Error::InvalidState {
                state: format!("{self:?}"),
                reason: format!("expected {} photon numbers", layout.n_modes()),
            });
        }
        if let Some(&n) = self.photons.iter().find(|&&n| n > layout.n_max()) {
            return Err(Error::InvalidState {
                state: format!("{self:?}"),
                reason: format!("{n} photons exceeds truncation {}", layout.n_max()),
            });
        }
        Ok(())
    }

    pub fn central_level(&self) -> QuditLevel {
        *self.levels.last().expect("state has at least one qudit")
    }

    pub fn is_vacuum(&self) -> bool {
        self.photons.iter().all(|&n| n == 0)
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let central = self.levels.len().saturating_sub(1);
        for (i, level) in self.levels.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if i == central {
                write!(f, "{level}A")?;
            } else {
                write!(f, "{level}{}", i + 1)?;
            }
        }
        write!(f, " |")?;
        for n in &self.photons {
            write!(f, " {n}")?;
        }
        Ok(())
    }
}

/// Excitation number: e-levels on any qudit, `s` on qudit A, and photons.
pub fn excitation_number(state: &BasisState) -> u32 {
    let central = state.levels.len() - 1;
    let qudits = state
        .levels
        .iter()
        .enumerate()
        .filter(|&(i, &l)| l == QuditLevel::E || (i == central && l == QuditLevel::S))
        .count() as u32;
    qudits + state.photons.iter().map(|&n| n as u32).sum::<u32>()
}

/// Action of a term on a single site.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SiteAction {
    /// `|to><from|` on one qudit.
    Transition {
        qudit: usize,
        to: QuditLevel,
        from: QuditLevel,
    },
    Lower {
        mode: usize,
    },
    Raise {
        mode: usize,
    },
}

impl SiteAction {
    pub fn adjoint(self) -> Self {
        match self {
            SiteAction::Transition { qudit, to, from } => SiteAction::Transition {
                qudit,
                to: from,
                from: to,
            },
            SiteAction::Lower { mode } => SiteAction::Raise { mode },
            SiteAction::Raise { mode } => SiteAction::Lower { mode },
        }
    }

    fn touches(&self) -> (bool, usize) {
        match *self {
            SiteAction::Transition { qudit, .. } => (true, qudit),
            SiteAction::Lower { mode } | SiteAction::Raise { mode } => (false, mode),
        }
    }

    fn is_self_adjoint(&self) -> bool {
        matches!(*self, SiteAction::Transition { to, from, .. } if to == from)
    }
}

/// Product of site actions with a complex amplitude, optionally paired with
/// its Hermitian conjugate.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorTerm {
    actions: Vec<SiteAction>,
    pub amplitude: C64,
    pub with_hc: bool,
}

impl OperatorTerm {
    pub fn new(actions: Vec<SiteAction>, amplitude: C64, with_hc: bool) -> Result<Self> {
        let mut seen = Vec::with_capacity(actions.len());
        for a in &actions {
            let site = a.touches();
            if seen.contains(&site) {
                return Err(Error::InvalidParameter(format!(
                    "term touches the same site twice: {actions:?}"
                )));
            }
            seen.push(site);
        }
        Ok(Self {
            actions,
            amplitude,
            with_hc,
        })
    }

    /// Scalar multiple of the identity.
    pub fn identity(amplitude: C64) -> Self {
        Self {
            actions: Vec::new(),
            amplitude,
            with_hc: false,
        }
    }

    pub fn actions(&self) -> &[SiteAction] {
        &self.actions
    }

    /// The conjugate partner, as a standalone term.
    pub fn adjoint(&self) -> Self {
        Self {
            actions: self.actions.iter().map(|a| a.adjoint()).collect(),
            amplitude: self.amplitude.conj(),
            with_hc: false,
        }
    }

    /// Whether the term, together with its h.c. flag, is Hermitian on its own.
    pub fn is_hermitian(&self) -> bool {
        self.with_hc
            || (self.amplitude.im == 0.0 && self.actions.iter().all(SiteAction::is_self_adjoint))
    }

    /// The term itself and, if flagged, its conjugate partner.
    pub fn expanded(&self) -> Vec<OperatorTerm> {
        let mut bare = self.clone();
        bare.with_hc = false;
        if self.with_hc {
            let adj = bare.adjoint();
            vec![bare, adj]
        } else {
            vec![bare]
        }
    }

    /// Applies the bare term (without its h.c. partner). `None` means the state
    /// is annihilated, including by raising a mode past `n_max`.
    pub fn apply(&self, state: &BasisState, n_max: u8) -> Option<(C64, BasisState)> {
        let mut out = state.clone();
        let mut amp = self.amplitude;
        for action in &self.actions {
            match *action {
                SiteAction::Transition { qudit, to, from } => {
                    if out.levels[qudit] != from {
                        return None;
                    }
                    out.levels[qudit] = to;
                }
                SiteAction::Lower { mode } => {
                    let n = out.photons[mode];
                    if n == 0 {
                        return None;
                    }
                    amp *= (n as f64).sqrt();
                    out.photons[mode] = n - 1;
                }
                SiteAction::Raise { mode } => {
                    let n = out.photons[mode];
                    if n >= n_max {
                        return None;
                    }
                    amp *= ((n + 1) as f64).sqrt();
                    out.photons[mode] = n + 1;
                }
            }
        }
        Some((amp, out))
    }

    fn check_layout(&self, layout: &SystemLayout) -> Result<()> {
        for a in &self.actions {
            let ok = match *a {
                SiteAction::Transition { qudit, .. } => qudit < layout.n_qudits(),
                SiteAction::Lower { mode } | SiteAction::Raise { mode } => mode < layout.n_modes(),
            };
            if !ok {
                return Err(Error::InvalidParameter(format!(
                    "term {self} addresses a site outside the layout"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for OperatorTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.amplitude)?;
        if self.actions.is_empty() {
            write!(f, " 1")?;
        }
        for a in &self.actions {
            match *a {
                SiteAction::Transition { qudit, to, from } => write!(f, " |{to}><{from}|_{qudit}")?,
                SiteAction::Lower { mode } => write!(f, " a_{mode}")?,
                SiteAction::Raise { mode } => write!(f, " a^dag_{mode}")?,
            }
        }
        if self.with_hc {
            write!(f, " + h.c.")?;
        }
        Ok(())
    }
}

/// Ordered, indexed list of basis states. Immutable once built.
#[derive(Clone, Debug)]
pub struct SubspaceBasis {
    layout: SystemLayout,
    states: Vec<BasisState>,
    index: HashMap<BasisState, usize>,
}

impl PartialEq for SubspaceBasis {
    fn eq(&self, other: &Self) -> bool {
        self.layout == other.layout && self.states == other.states
    }
}

impl SubspaceBasis {
    /// Builds a basis from an explicit list; duplicates are rejected.
    pub fn from_states(layout: SystemLayout, states: Vec<BasisState>) -> Result<Self> {
        let mut index = HashMap::with_capacity(states.len());
        for (i, s) in states.iter().enumerate() {
            s.validate(&layout)?;
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::InvalidState {
                    state: s.label(),
                    reason: "duplicate basis state".into(),
                });
            }
        }
        Ok(Self {
            layout,
            states,
            index,
        })
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &BasisState {
        &self.states[i]
    }

    pub fn index_of(&self, state: &BasisState) -> Option<usize> {
        self.index.get(state).copied()
    }

    pub fn contains(&self, state: &BasisState) -> bool {
        self.index.contains_key(state)
    }

    pub fn labels(&self) -> Vec<String> {
        self.states.iter().map(BasisState::label).collect()
    }
}

/// Breadth-first closure of `seeds` under `generators` (and their h.c.
/// partners), capped at [`DEFAULT_CAPACITY`] states.
pub fn enumerate_reachable(
    layout: SystemLayout,
    seeds: &[BasisState],
    generators: &[OperatorTerm],
) -> Result<SubspaceBasis> {
    enumerate_reachable_capped(layout, seeds, generators, DEFAULT_CAPACITY)
}

/// Closure is structural: a term with zero amplitude still connects states,
/// so the basis does not depend on parameter values.
pub fn enumerate_reachable_capped(
    layout: SystemLayout,
    seeds: &[BasisState],
    generators: &[OperatorTerm],
    cap: usize,
) -> Result<SubspaceBasis> {
    let expanded: Vec<OperatorTerm> = generators
        .iter()
        .map(|t| t.check_layout(&layout).map(|_| t.expanded()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let mut states: Vec<BasisState> = Vec::new();
    let mut index: HashMap<BasisState, usize> = HashMap::new();
    let mut queue = VecDeque::new();

    let mut push =
        |s: BasisState, states: &mut Vec<BasisState>, queue: &mut VecDeque<usize>| -> Result<()> {
            if index.contains_key(&s) {
                return Ok(());
            }
            if states.len() >= cap {
                return Err(Error::Capacity { cap });
            }
            index.insert(s.clone(), states.len());
            queue.push_back(states.len());
            states.push(s);
            Ok(())
        };

    for seed in seeds {
        seed.validate(&layout)?;
        push(seed.clone(), &mut states, &mut queue)?;
    }
    while let Some(i) = queue.pop_front() {
        let current = states[i].clone();
        for term in &expanded {
            if let Some((_, next)) = term.apply(&current, layout.n_max()) {
                push(next, &mut states, &mut queue)?;
            }
        }
    }
    SubspaceBasis::from_states(layout, states)
}
