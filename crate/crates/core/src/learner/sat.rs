//! A small conflict-driven clause-learning SAT solver.
//!
//! Two watched literals, first-UIP learning with recursive minimization,
//! VSIDS branching with phase saving, Luby restarts and periodic deletion of
//! learnt clauses ranked by LBD. Deterministic: identical clause sequences
//! yield identical models.

use std::io::{self, Write};
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

/// A literal: variable index shifted left once, low bit set for negation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn pos(v: Var) -> Lit {
        Lit(v.0 << 1)
    }

    pub fn neg(v: Var) -> Lit {
        Lit((v.0 << 1) | 1)
    }

    pub fn new(v: Var, positive: bool) -> Lit {
        if positive {
            Lit::pos(v)
        } else {
            Lit::neg(v)
        }
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_neg(self) -> bool {
        self.0 & 1 == 1
    }

    /// DIMACS integer: 1-based variable, sign for polarity.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var().0 as i64 + 1;
        if self.is_neg() {
            -v
        } else {
            v
        }
    }

    fn code(self) -> usize {
        self.0 as usize
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

/// A plain clause list, kept separately from the solver so it can be dumped.
#[derive(Clone, Debug, Default)]
pub struct Cnf {
    num_vars: u32,
    clauses: Vec<Vec<Lit>>,
}

impl Cnf {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn new_var(&mut self) -> Var {
        let v = Var(self.num_vars);
        self.num_vars += 1;
        v
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars as usize
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn add_clause(&mut self, lits: &[Lit]) {
        debug_assert!(lits.iter().all(|l| l.var().0 < self.num_vars));
        self.clauses.push(lits.to_vec());
    }

    /// Clause `guard_1 ∧ … ∧ guard_k → (l_1 ∨ … ∨ l_n)`.
    pub fn add_implication(&mut self, guards: &[Lit], lits: &[Lit]) {
        let mut c: Vec<Lit> = guards.iter().map(|g| !*g).collect();
        c.extend_from_slice(lits);
        self.add_clause(&c);
    }

    /// Exactly one of `lits` is true (pairwise at-most-one).
    pub fn exactly_one(&mut self, lits: &[Lit]) {
        self.add_clause(lits);
        for (i, &a) in lits.iter().enumerate() {
            for &b in &lits[i + 1..] {
                self.add_clause(&[!a, !b]);
            }
        }
    }

    pub fn write_dimacs<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len())?;
        for c in &self.clauses {
            for l in c {
                write!(out, "{} ", l.to_dimacs())?;
            }
            writeln!(out, "0")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveResult {
    Sat,
    Unsat,
    /// Stopped at the deadline before reaching an answer.
    Unknown,
}

const UNDEF: u8 = 2;
const NO_REASON: u32 = u32::MAX;

#[derive(Clone, Copy)]
struct Watch {
    clause: u32,
    blocker: Lit,
}

struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    lbd: u32,
    deleted: bool,
}

pub struct Solver {
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watch>>,
    assign: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    heap: VarHeap,
    phase: Vec<bool>,
    seen: Vec<u8>,
    unsat: bool,
    num_learnt: usize,
    deadline: Option<Instant>,
    conflicts: u64,
    model: Vec<bool>,
}

impl Default for Solver {
    fn default() -> Self {
        Self::new()
    }
}

impl Solver {
    pub fn new() -> Self {
        Solver {
            clauses: Vec::new(),
            watches: Vec::new(),
            assign: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            heap: VarHeap::default(),
            phase: Vec::new(),
            seen: Vec::new(),
            unsat: false,
            num_learnt: 0,
            deadline: None,
            conflicts: 0,
            model: Vec::new(),
        }
    }

    pub fn from_cnf(cnf: &Cnf) -> Self {
        let mut s = Solver::new();
        s.reserve_vars(cnf.num_vars());
        for c in cnf.clauses() {
            s.add_clause(c);
        }
        s
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    pub fn num_vars(&self) -> usize {
        self.assign.len()
    }

    pub fn conflicts(&self) -> u64 {
        self.conflicts
    }

    pub fn new_var(&mut self) -> Var {
        let v = Var(self.assign.len() as u32);
        self.assign.push(UNDEF);
        self.level.push(0);
        self.reason.push(NO_REASON);
        self.activity.push(0.0);
        self.phase.push(false);
        self.seen.push(0);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.heap.insert(v.0, &self.activity);
        v
    }

    pub fn reserve_vars(&mut self, n: usize) {
        while self.num_vars() < n {
            self.new_var();
        }
    }

    fn value(&self, l: Lit) -> u8 {
        let a = self.assign[l.var().0 as usize];
        if a == UNDEF {
            UNDEF
        } else {
            a ^ (l.is_neg() as u8)
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Adds a clause at decision level 0. Returns false once the formula is
    /// known to be unsatisfiable.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        if self.unsat {
            return false;
        }
        debug_assert_eq!(self.decision_level(), 0);
        let mut c: Vec<Lit> = lits.to_vec();
        c.sort_unstable();
        c.dedup();
        for w in c.windows(2) {
            if w[0] == !w[1] {
                return true;
            }
        }
        c.retain(|&l| self.value(l) != 0);
        if c.iter().any(|&l| self.value(l) == 1) {
            return true;
        }
        match c.len() {
            0 => {
                self.unsat = true;
                false
            }
            1 => {
                self.enqueue(c[0], NO_REASON);
                if self.propagate().is_some() {
                    self.unsat = true;
                    return false;
                }
                true
            }
            _ => {
                self.attach(c, false, 0);
                true
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool, lbd: u32) -> u32 {
        let idx = self.clauses.len() as u32;
        self.watches[(!lits[0]).code()].push(Watch { clause: idx, blocker: lits[1] });
        self.watches[(!lits[1]).code()].push(Watch { clause: idx, blocker: lits[0] });
        if learnt {
            self.num_learnt += 1;
        }
        self.clauses.push(Clause { lits, learnt, lbd, deleted: false });
        idx
    }

    fn enqueue(&mut self, l: Lit, reason: u32) {
        let v = l.var().0 as usize;
        self.assign[v] = (!l.is_neg()) as u8;
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Unit propagation; returns the index of a conflicting clause.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[p.code()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == 1 {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let ci = w.clause as usize;
                if self.clauses[ci].deleted {
                    continue;
                }
                {
                    let lits = &mut self.clauses[ci].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                }
                let first = self.clauses[ci].lits[0];
                let nw = Watch { clause: w.clause, blocker: first };
                if first != w.blocker && self.value(first) == 1 {
                    ws[j] = nw;
                    j += 1;
                    continue;
                }
                let len = self.clauses[ci].lits.len();
                let mut moved = false;
                for k in 2..len {
                    let l = self.clauses[ci].lits[k];
                    if self.value(l) != 0 {
                        self.clauses[ci].lits.swap(1, k);
                        let new_watch = !self.clauses[ci].lits[1];
                        self.watches[new_watch.code()].push(nw);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = nw;
                j += 1;
                if self.value(first) == 0 {
                    conflict = Some(w.clause);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, w.clause);
                }
            }
            ws.truncate(j);
            // Watches pushed onto p's list during this pass came from other
            // clauses moving their watch; keep them.
            let added = std::mem::take(&mut self.watches[p.code()]);
            ws.extend(added);
            self.watches[p.code()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump(&mut self, v: Var) {
        let vi = v.0 as usize;
        self.activity[vi] += self.var_inc;
        if self.activity[vi] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increase(v.0, &self.activity);
    }

    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, u32, u32) {
        let mut learnt: Vec<Lit> = vec![Lit(0)];
        let mut path = 0usize;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let dl = self.decision_level();
        loop {
            let start = if p.is_some() { 1 } else { 0 };
            let lits = self.clauses[confl as usize].lits.clone();
            for &q in &lits[start..] {
                let v = q.var();
                let vi = v.0 as usize;
                if self.seen[vi] == 0 && self.level[vi] > 0 {
                    self.bump(v);
                    self.seen[vi] = 1;
                    if self.level[vi] >= dl {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var().0 as usize] != 0 {
                    break;
                }
            }
            let lit = self.trail[idx];
            p = Some(lit);
            confl = self.reason[lit.var().0 as usize];
            self.seen[lit.var().0 as usize] = 0;
            path -= 1;
            if path == 0 {
                break;
            }
        }
        learnt[0] = !p.expect("uip");

        // Recursive minimization: drop literals implied by the rest.
        let mut to_clear: Vec<usize> = learnt[1..].iter().map(|l| l.var().0 as usize).collect();
        let mut kept = vec![learnt[0]];
        for &l in &learnt[1..] {
            let vi = l.var().0 as usize;
            if self.reason[vi] == NO_REASON || !self.redundant(l, &mut to_clear) {
                kept.push(l);
            }
        }
        for v in to_clear {
            self.seen[v] = 0;
        }
        let mut learnt = kept;
        let mut backtrack = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var().0 as usize] > self.level[learnt[max_i].var().0 as usize] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            backtrack = self.level[learnt[1].var().0 as usize];
        }
        let lbd = self.lbd(&learnt);
        (learnt, backtrack, lbd)
    }

    fn lbd(&self, lits: &[Lit]) -> u32 {
        let mut levels: Vec<u32> = lits.iter().map(|l| self.level[l.var().0 as usize]).collect();
        levels.sort_unstable();
        levels.dedup();
        levels.len() as u32
    }

    fn redundant(&mut self, l: Lit, to_clear: &mut Vec<usize>) -> bool {
        let mut stack = vec![l];
        let top = to_clear.len();
        while let Some(p) = stack.pop() {
            let r = self.reason[p.var().0 as usize];
            let lits = self.clauses[r as usize].lits.clone();
            for &q in &lits[1..] {
                let vi = q.var().0 as usize;
                if self.seen[vi] == 0 && self.level[vi] > 0 {
                    if self.reason[vi] != NO_REASON {
                        self.seen[vi] = 1;
                        stack.push(q);
                        to_clear.push(vi);
                    } else {
                        for &v in &to_clear[top..] {
                            self.seen[v] = 0;
                        }
                        to_clear.truncate(top);
                        return false;
                    }
                }
            }
        }
        true
    }

    fn cancel_until(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let lim = self.trail_lim[lvl as usize];
        for i in (lim..self.trail.len()).rev() {
            let v = self.trail[i].var();
            let vi = v.0 as usize;
            self.phase[vi] = !self.trail[i].is_neg();
            self.assign[vi] = UNDEF;
            self.reason[vi] = NO_REASON;
            self.heap.insert(v.0, &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(lvl as usize);
        self.qhead = lim;
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assign[v as usize] == UNDEF {
                return Some(Lit::new(Var(v), self.phase[v as usize]));
            }
        }
        None
    }

    fn reduce_db(&mut self) {
        let mut learnts: Vec<usize> = (0..self.clauses.len())
            .filter(|&i| self.clauses[i].learnt && !self.clauses[i].deleted)
            .collect();
        learnts.sort_by_key(|&i| (std::cmp::Reverse(self.clauses[i].lbd), std::cmp::Reverse(i)));
        let remove = learnts.len() / 2;
        for &ci in learnts.iter().take(remove) {
            let c = &self.clauses[ci];
            if c.lbd <= 2 {
                continue;
            }
            let first = c.lits[0];
            let locked = self.value(first) == 1 && self.reason[first.var().0 as usize] == ci as u32;
            if !locked {
                self.clauses[ci].deleted = true;
                self.num_learnt -= 1;
            }
        }
        for ws in self.watches.iter_mut() {
            let clauses = &self.clauses;
            ws.retain(|w| !clauses[w.clause as usize].deleted);
        }
    }

    pub fn solve(&mut self) -> SolveResult {
        if self.unsat {
            return SolveResult::Unsat;
        }
        if self.propagate().is_some() {
            self.unsat = true;
            return SolveResult::Unsat;
        }
        let mut restart = 0u32;
        let mut max_learnt = (self.clauses.len() / 3).max(2000);
        loop {
            let budget = 100 * luby(restart);
            restart += 1;
            match self.search(budget, &mut max_learnt) {
                Some(r) => return r,
                None => continue,
            }
        }
    }

    fn search(&mut self, budget: u64, max_learnt: &mut usize) -> Option<SolveResult> {
        let mut local = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.conflicts += 1;
                local += 1;
                if self.decision_level() == 0 {
                    self.unsat = true;
                    return Some(SolveResult::Unsat);
                }
                let (learnt, backtrack, lbd) = self.analyze(confl);
                self.cancel_until(backtrack);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], NO_REASON);
                } else {
                    let first = learnt[0];
                    let ci = self.attach(learnt, true, lbd);
                    self.enqueue(first, ci);
                }
                self.var_inc /= 0.95;
                if self.conflicts % 512 == 0 {
                    if let Some(d) = self.deadline {
                        if Instant::now() >= d {
                            self.cancel_until(0);
                            return Some(SolveResult::Unknown);
                        }
                    }
                }
            } else {
                if local >= budget {
                    self.cancel_until(0);
                    return None;
                }
                if self.num_learnt >= *max_learnt + self.trail.len() {
                    self.reduce_db();
                    *max_learnt += *max_learnt / 10;
                }
                match self.pick_branch() {
                    None => {
                        self.model = (0..self.num_vars()).map(|v| self.assign[v] == 1).collect();
                        self.cancel_until(0);
                        return Some(SolveResult::Sat);
                    }
                    Some(l) => {
                        self.trail_lim.push(self.trail.len());
                        self.enqueue(l, NO_REASON);
                    }
                }
            }
        }
    }

    /// Value of `v` in the last model found by [`Solver::solve`].
    pub fn model_value(&self, v: Var) -> bool {
        self.model[v.0 as usize]
    }

    pub fn model(&self) -> &[bool] {
        &self.model
    }
}

fn luby(mut i: u32) -> u64 {
    // Finite subsequences of the Luby sequence: 1 1 2 1 1 2 4 ...
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < (i as u64) + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    let mut x = i as u64;
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    i = seq;
    1u64 << i
}

/// Binary max-heap over variable activities with position tracking.
#[derive(Default)]
struct VarHeap {
    heap: Vec<u32>,
    pos: Vec<usize>,
}

const NOT_IN_HEAP: usize = usize::MAX;

impl VarHeap {
    fn insert(&mut self, v: u32, act: &[f64]) {
        let vi = v as usize;
        if self.pos.len() <= vi {
            self.pos.resize(vi + 1, NOT_IN_HEAP);
        }
        if self.pos[vi] != NOT_IN_HEAP {
            return;
        }
        self.heap.push(v);
        self.pos[vi] = self.heap.len() - 1;
        self.up(self.heap.len() - 1, act);
    }

    fn increase(&mut self, v: u32, act: &[f64]) {
        if let Some(&p) = self.pos.get(v as usize) {
            if p != NOT_IN_HEAP {
                self.up(p, act);
            }
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<u32> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap[0];
        let last = self.heap.pop().expect("non-empty");
        self.pos[top as usize] = NOT_IN_HEAP;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last as usize] = 0;
            self.down(0, act);
        }
        Some(top)
    }

    fn better(a: u32, b: u32, act: &[f64]) -> bool {
        let (x, y) = (act[a as usize], act[b as usize]);
        x > y || (x == y && a < b)
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if !Self::better(v, self.heap[parent], act) {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.pos[self.heap[i] as usize] = i;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i;
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && Self::better(self.heap[r], self.heap[l], act) { r } else { l };
            if !Self::better(self.heap[c], v, act) {
                break;
            }
            self.heap[i] = self.heap[c];
            self.pos[self.heap[i] as usize] = i;
            i = c;
        }
        self.heap[i] = v;
        self.pos[v as usize] = i;
    }
}
