//! LALR(1) table construction.
//!
//! Builds the LR(0) automaton, then attaches lookaheads by propagating them
//! through closures and gotos until a fixpoint is reached. The result is the
//! same table a canonical LR(1) construction produces after merging states
//! with identical cores.

use std::collections::{BTreeMap, HashMap, VecDeque};

/// A grammar symbol: terminal or nonterminal index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    T(usize),
    N(usize),
}

#[derive(Debug, Clone)]
pub struct Production {
    pub lhs: usize,
    pub rhs: Vec<Symbol>,
}

#[derive(Debug, Clone)]
pub struct Grammar {
    pub n_terminals: usize,
    pub n_nonterminals: usize,
    pub productions: Vec<Production>,
    pub start: usize,
    pub eof: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Shift(usize),
    Reduce(usize),
    Accept,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conflict {
    pub state: usize,
    pub terminal: usize,
    pub existing: Action,
    pub incoming: Action,
}

/// Parse tables indexed by `[state][terminal]` and `[state][nonterminal]`.
#[derive(Debug, Clone)]
pub struct Tables {
    pub action: Vec<Vec<Action>>,
    pub goto: Vec<Vec<Option<usize>>>,
    pub productions: Vec<Production>,
}

impl Tables {
    pub fn state_count(&self) -> usize {
        self.action.len()
    }

    pub fn action(&self, state: usize, terminal: usize) -> Action {
        self.action[state][terminal]
    }

    pub fn goto(&self, state: usize, nonterminal: usize) -> Option<usize> {
        self.goto[state][nonterminal]
    }

    /// Whether `terminal` would eventually be shifted (or accepted) from the
    /// configuration `stack`, following any reductions it triggers.
    pub fn viable(&self, stack: &[usize], terminal: usize) -> bool {
        let mut stack = stack.to_vec();
        // Each reduction pops at least the produced nonterminal's state or
        // pushes one; bound the walk to guard against malformed tables.
        for _ in 0..=self.state_count() * 4 + 16 {
            let Some(&top) = stack.last() else {
                return false;
            };
            match self.action(top, terminal) {
                Action::Shift(_) | Action::Accept => return true,
                Action::Error => return false,
                Action::Reduce(p) => {
                    let prod = &self.productions[p];
                    let keep = stack.len().saturating_sub(prod.rhs.len());
                    stack.truncate(keep);
                    let Some(&under) = stack.last() else {
                        return false;
                    };
                    match self.goto(under, prod.lhs) {
                        Some(next) => stack.push(next),
                        None => return false,
                    }
                }
            }
        }
        false
    }
}

type Bits = u128;

fn bit(t: usize) -> Bits {
    1 << t
}

struct Analysis {
    nullable: Vec<bool>,
    first: Vec<Bits>,
}

impl Analysis {
    fn new(g: &Grammar) -> Self {
        let mut nullable = vec![false; g.n_nonterminals];
        let mut first = vec![0 as Bits; g.n_nonterminals];
        let mut changed = true;
        while changed {
            changed = false;
            for p in &g.productions {
                let mut all_nullable = true;
                let mut acc: Bits = 0;
                for sym in &p.rhs {
                    match *sym {
                        Symbol::T(t) => {
                            acc |= bit(t);
                            all_nullable = false;
                        }
                        Symbol::N(n) => {
                            acc |= first[n];
                            if !nullable[n] {
                                all_nullable = false;
                            }
                        }
                    }
                    if !all_nullable {
                        break;
                    }
                }
                if first[p.lhs] | acc != first[p.lhs] {
                    first[p.lhs] |= acc;
                    changed = true;
                }
                if all_nullable && !nullable[p.lhs] {
                    nullable[p.lhs] = true;
                    changed = true;
                }
            }
        }
        Self { nullable, first }
    }

    /// FIRST of a symbol string and whether the whole string is nullable.
    fn first_of(&self, symbols: &[Symbol]) -> (Bits, bool) {
        let mut acc = 0;
        for sym in symbols {
            match *sym {
                Symbol::T(t) => return (acc | bit(t), false),
                Symbol::N(n) => {
                    acc |= self.first[n];
                    if !self.nullable[n] {
                        return (acc, false);
                    }
                }
            }
        }
        (acc, true)
    }
}

/// Item core: (production, dot position).
type Core = (usize, usize);

fn closure_lr0(g: &Grammar, kernel: &[Core]) -> Vec<Core> {
    let mut items: Vec<Core> = kernel.to_vec();
    let mut seen: std::collections::HashSet<Core> = items.iter().copied().collect();
    let mut i = 0;
    while i < items.len() {
        let (p, d) = items[i];
        if let Some(Symbol::N(n)) = g.productions[p].rhs.get(d) {
            for (q, prod) in g.productions.iter().enumerate() {
                if prod.lhs == *n && seen.insert((q, 0)) {
                    items.push((q, 0));
                }
            }
        }
        i += 1;
    }
    items
}

fn closure_lalr(g: &Grammar, an: &Analysis, kernel: &BTreeMap<Core, Bits>) -> BTreeMap<Core, Bits> {
    let mut items = kernel.clone();
    let mut work: VecDeque<Core> = items.keys().copied().collect();
    while let Some((p, d)) = work.pop_front() {
        let la = items[&(p, d)];
        let rhs = &g.productions[p].rhs;
        if let Some(Symbol::N(n)) = rhs.get(d) {
            let (first, nullable) = an.first_of(&rhs[d + 1..]);
            let inherited = if nullable { first | la } else { first };
            for (q, prod) in g.productions.iter().enumerate() {
                if prod.lhs != *n {
                    continue;
                }
                let is_new = !items.contains_key(&(q, 0));
                let entry = items.entry((q, 0)).or_insert(0);
                let before = *entry;
                *entry |= inherited;
                if is_new || *entry != before {
                    work.push_back((q, 0));
                }
            }
        }
    }
    items
}

/// Builds LALR(1) tables. The grammar is augmented internally with
/// `S' -> start`; its production index is `grammar.productions.len()`.
pub fn build(grammar: &Grammar) -> Result<Tables, Vec<Conflict>> {
    assert!(grammar.n_terminals <= Bits::BITS as usize);
    let mut g = grammar.clone();
    let aug_lhs = g.n_nonterminals;
    g.n_nonterminals += 1;
    let aug = g.productions.len();
    g.productions.push(Production {
        lhs: aug_lhs,
        rhs: vec![Symbol::N(grammar.start)],
    });
    let an = Analysis::new(&g);

    // LR(0) automaton over sorted kernels.
    let mut kernels: Vec<Vec<Core>> = vec![vec![(aug, 0)]];
    let mut index: HashMap<Vec<Core>, usize> = HashMap::new();
    index.insert(kernels[0].clone(), 0);
    let mut transitions: Vec<BTreeMap<Symbol, usize>> = vec![BTreeMap::new()];
    let mut s = 0;
    while s < kernels.len() {
        let items = closure_lr0(&g, &kernels[s]);
        let mut moves: BTreeMap<Symbol, Vec<Core>> = BTreeMap::new();
        for (p, d) in items {
            if let Some(sym) = g.productions[p].rhs.get(d) {
                moves.entry(*sym).or_default().push((p, d + 1));
            }
        }
        for (sym, mut kernel) in moves {
            kernel.sort_unstable();
            kernel.dedup();
            let target = match index.get(&kernel) {
                Some(&t) => t,
                None => {
                    let t = kernels.len();
                    index.insert(kernel.clone(), t);
                    kernels.push(kernel);
                    transitions.push(BTreeMap::new());
                    t
                }
            };
            transitions[s].insert(sym, target);
        }
        s += 1;
    }

    // Lookahead propagation to a fixpoint.
    let mut la: Vec<BTreeMap<Core, Bits>> = kernels
        .iter()
        .map(|k| k.iter().map(|c| (*c, 0)).collect())
        .collect();
    la[0].insert((aug, 0), bit(g.eof));
    let mut changed = true;
    while changed {
        changed = false;
        for s in 0..kernels.len() {
            let closed = closure_lalr(&g, &an, &la[s]);
            for ((p, d), bits) in closed {
                if let Some(sym) = g.productions[p].rhs.get(d) {
                    let t = transitions[s][sym];
                    let slot = la[t].get_mut(&(p, d + 1)).expect("kernel item");
                    if *slot | bits != *slot {
                        *slot |= bits;
                        changed = true;
                    }
                }
            }
        }
    }

    let n_states = kernels.len();
    let mut action = vec![vec![Action::Error; g.n_terminals]; n_states];
    let mut goto = vec![vec![None; grammar.n_nonterminals]; n_states];
    let mut conflicts = Vec::new();

    for s in 0..n_states {
        for (sym, &t) in &transitions[s] {
            match *sym {
                Symbol::T(term) => action[s][term] = Action::Shift(t),
                Symbol::N(n) => {
                    if n < grammar.n_nonterminals {
                        goto[s][n] = Some(t);
                    }
                }
            }
        }
        let closed = closure_lalr(&g, &an, &la[s]);
        for ((p, d), bits) in closed {
            if d != g.productions[p].rhs.len() {
                continue;
            }
            for (term, slot) in action[s].iter_mut().enumerate().take(g.n_terminals) {
                if bits & bit(term) == 0 {
                    continue;
                }
                let incoming = if p == aug {
                    Action::Accept
                } else {
                    Action::Reduce(p)
                };
                let existing = *slot;
                if existing == Action::Error {
                    *slot = incoming;
                } else if existing != incoming {
                    conflicts.push(Conflict {
                        state: s,
                        terminal: term,
                        existing,
                        incoming,
                    });
                }
            }
        }
    }

    if conflicts.is_empty() {
        Ok(Tables {
            action,
            goto,
            productions: grammar.productions.clone(),
        })
    } else {
        Err(conflicts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Symbol::{N, T};

    // Terminals: 0 = id, 1 = '+', 2 = '*', 3 = '(', 4 = ')', 5 = eof
    // E -> E + T | T ; T -> T * F | F ; F -> ( E ) | id
    fn expr_grammar() -> Grammar {
        let p = |lhs, rhs: Vec<Symbol>| Production { lhs, rhs };
        Grammar {
            n_terminals: 6,
            n_nonterminals: 3,
            productions: vec![
                p(0, vec![N(0), T(1), N(1)]),
                p(0, vec![N(1)]),
                p(1, vec![N(1), T(2), N(2)]),
                p(1, vec![N(2)]),
                p(2, vec![T(3), N(0), T(4)]),
                p(2, vec![T(0)]),
            ],
            start: 0,
            eof: 5,
        }
    }

    fn accepts(tables: &Tables, input: &[usize]) -> bool {
        let mut stack = vec![0usize];
        let mut i = 0;
        loop {
            let t = input[i];
            match tables.action(*stack.last().unwrap(), t) {
                Action::Shift(s) => {
                    stack.push(s);
                    i += 1;
                }
                Action::Reduce(p) => {
                    let prod = &tables.productions[p];
                    stack.truncate(stack.len() - prod.rhs.len());
                    let g = tables.goto(*stack.last().unwrap(), prod.lhs).unwrap();
                    stack.push(g);
                }
                Action::Accept => return true,
                Action::Error => return false,
            }
        }
    }

    #[test]
    fn classic_expression_grammar_is_lalr() {
        let tables = build(&expr_grammar()).expect("no conflicts");
        // The textbook LR(0) automaton for this grammar has 12 states.
        assert_eq!(tables.state_count(), 12);
        assert!(accepts(&tables, &[0, 1, 0, 2, 0, 5]));
        assert!(accepts(&tables, &[3, 0, 1, 0, 4, 2, 0, 5]));
        assert!(!accepts(&tables, &[0, 0, 5]));
        assert!(!accepts(&tables, &[3, 0, 5]));
    }

    #[test]
    fn ambiguous_grammar_reports_conflicts() {
        // E -> E + E | id
        let g = Grammar {
            n_terminals: 3,
            n_nonterminals: 1,
            productions: vec![
                Production { lhs: 0, rhs: vec![N(0), T(1), N(0)] },
                Production { lhs: 0, rhs: vec![T(0)] },
            ],
            start: 0,
            eof: 2,
        };
        let conflicts = build(&g).unwrap_err();
        assert!(conflicts.iter().any(|c| c.terminal == 1));
    }

    #[test]
    fn lalr_but_not_slr() {
        // S -> L = R | R ; L -> * R | id ; R -> L
        // Terminals: 0 '=', 1 '*', 2 id, 3 eof. Nonterminals: 0 S, 1 L, 2 R.
        let p = |lhs, rhs: Vec<Symbol>| Production { lhs, rhs };
        let g = Grammar {
            n_terminals: 4,
            n_nonterminals: 3,
            productions: vec![
                p(0, vec![N(1), T(0), N(2)]),
                p(0, vec![N(2)]),
                p(1, vec![T(1), N(2)]),
                p(1, vec![T(2)]),
                p(2, vec![N(1)]),
            ],
            start: 0,
            eof: 3,
        };
        let tables = build(&g).expect("grammar is LALR(1)");
        assert!(accepts(&tables, &[1, 2, 0, 2, 3]));
        assert!(accepts(&tables, &[2, 3]));
        assert!(!accepts(&tables, &[2, 0, 3]));
    }

    #[test]
    fn viable_follows_reductions() {
        let tables = build(&expr_grammar()).unwrap();
        // After shifting `id` (state reached from 0 on terminal 0).
        let Action::Shift(after_id) = tables.action(0, 0) else { panic!() };
        let stack = [0, after_id];
        assert!(tables.viable(&stack, 1));
        assert!(tables.viable(&stack, 2));
        assert!(tables.viable(&stack, 5));
        assert!(!tables.viable(&stack, 0));
        assert!(!tables.viable(&stack, 4));
    }
}
