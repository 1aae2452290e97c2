//! Propositional encoding of "some LTL formula with at most `n` DAG nodes is
//! consistent with the sample".
//!
//! Nodes are numbered `1..=n` (stored 0-based); node `n` is the root and
//! every child index is strictly smaller than its parent's. Each node carries
//! a one-hot operator label and one-hot left/right child pointers. For every
//! sample word `w` of length `m`, node `i` and position `t` the variable
//! `y[w][i][t]` holds the truth value of the node's subformula at `(w, t)`.
//! Child values are routed through per-node copies `L`/`R` so operator
//! constraints stay linear in the sample length; the temporal operators use
//! the backward recurrences
//!
//! ```text
//! X: y_t ↔ L_{t+1}            y_m ↔ ⊥
//! F: y_t ↔ L_t ∨ y_{t+1}      y_m ↔ L_m
//! G: y_t ↔ L_t ∧ y_{t+1}      y_m ↔ L_m
//! U: y_t ↔ R_t ∨ (L_t ∧ y_{t+1})   y_m ↔ R_m
//! ```
//!
//! The empty word has no positions; if it is in the sample each node gets a
//! single "value on λ" variable following [`Op::empty_value`].

use std::collections::HashMap;

use super::sat::{Cnf, Lit, Var};
use super::{OperatorSet, Sample};
use crate::alphabet::{Alphabet, Word};
use crate::ltl::{Formula, Op};

/// Clause set `Φ_n^S` together with the variable layout needed to decode models.
pub struct SyntaxDagEncoding {
    n: usize,
    cnf: Cnf,
    labels: Vec<Vec<(Op, Var)>>,
    left: Vec<Vec<Var>>,
    right: Vec<Vec<Var>>,
}

impl SyntaxDagEncoding {
    pub fn size_bound(&self) -> usize {
        self.n
    }

    pub fn cnf(&self) -> &Cnf {
        &self.cnf
    }

    /// Label variable `x[i, op]` for 1-indexed node `i`, if that label is allowed there.
    pub fn label_var(&self, node: usize, op: Op) -> Option<Var> {
        self.labels[node - 1]
            .iter()
            .find(|(o, _)| *o == op)
            .map(|(_, v)| *v)
    }

    /// Labels that may appear at 1-indexed node `i`.
    pub fn labels_at(&self, node: usize) -> impl Iterator<Item = Op> + '_ {
        self.labels[node - 1].iter().map(|(o, _)| *o)
    }

    /// Reads the formula rooted at node `n` off a model.
    pub fn decode(&self, model: &[bool]) -> Formula {
        let mut memo: HashMap<usize, Formula> = HashMap::new();
        self.decode_node(self.n - 1, model, &mut memo)
    }

    fn decode_node(&self, i: usize, model: &[bool], memo: &mut HashMap<usize, Formula>) -> Formula {
        if let Some(f) = memo.get(&i) {
            return f.clone();
        }
        let val = |v: Var| model[v.0 as usize];
        let op = self.labels[i]
            .iter()
            .find(|(_, v)| val(*v))
            .map(|(o, _)| *o)
            .expect("model assigns no label to a node");
        let child = |ptrs: &Vec<Vec<Var>>| -> usize {
            ptrs[i]
                .iter()
                .position(|v| val(*v))
                .expect("model assigns no child pointer")
        };
        let left = (op.arity() >= 1).then(|| {
            let j = child(&self.left);
            self.decode_node(j, model, memo)
        });
        let right = (op.arity() == 2).then(|| {
            let j = child(&self.right);
            self.decode_node(j, model, memo)
        });
        let f = Formula::from_op(op, left, right);
        memo.insert(i, f.clone());
        f
    }
}

fn allowed_labels(ops: &OperatorSet, alphabet: &Alphabet, leaf_only: bool) -> Vec<Op> {
    let mut out: Vec<Op> = alphabet.symbols().map(Op::Atom).collect();
    out.extend(ops.enabled().into_iter().filter(|op| !leaf_only || op.arity() == 0));
    out
}

/// Builds `Φ_n^S` for sample `sample`, size bound `n` and the enabled operators.
pub fn encode(sample: &Sample, n: usize, ops: &OperatorSet) -> SyntaxDagEncoding {
    assert!(n >= 1, "size bound must be positive");
    let alphabet = sample.alphabet();
    let mut cnf = Cnf::new();

    let mut labels: Vec<Vec<(Op, Var)>> = Vec::with_capacity(n);
    for i in 0..n {
        let allowed = allowed_labels(ops, alphabet, i == 0);
        let vars: Vec<(Op, Var)> = allowed.into_iter().map(|op| (op, cnf.new_var())).collect();
        let lits: Vec<Lit> = vars.iter().map(|(_, v)| Lit::pos(*v)).collect();
        cnf.exactly_one(&lits);
        labels.push(vars);
    }

    let uses_left = ops.enabled().iter().any(|op| op.arity() >= 1);
    let uses_right = ops.enabled().iter().any(|op| op.arity() == 2);
    let pointers = |enabled: bool, cnf: &mut Cnf| -> Vec<Vec<Var>> {
        (0..n)
            .map(|i| {
                if !enabled || i == 0 {
                    return Vec::new();
                }
                let vars: Vec<Var> = (0..i).map(|_| cnf.new_var()).collect();
                let lits: Vec<Lit> = vars.iter().map(|v| Lit::pos(*v)).collect();
                cnf.exactly_one(&lits);
                vars
            })
            .collect()
    };
    let left = pointers(uses_left, &mut cnf);
    let right = pointers(uses_right, &mut cnf);

    let root = n - 1;
    for (word, label) in sample.iter() {
        if word.is_empty() {
            let e = encode_empty(&mut cnf, &labels, &left, &right);
            cnf.add_clause(&[Lit::new(e[root], label)]);
            continue;
        }
        let tracks = encode_word(&mut cnf, word, &labels, &left, &right);
        cnf.add_clause(&[Lit::new(tracks[root][0], label)]);
    }

    SyntaxDagEncoding { n, cnf, labels, left, right }
}

/// Links `copy[t]` to `y_j[t]` whenever pointer `ptr[j]` is selected.
fn link_child(cnf: &mut Cnf, ptr: &[Var], copy: &[Var], child_values: &[&[Var]]) {
    for (j, &p) in ptr.iter().enumerate() {
        for (t, &c) in copy.iter().enumerate() {
            let y = child_values[j][t];
            cnf.add_implication(&[Lit::pos(p), Lit::pos(c)], &[Lit::pos(y)]);
            cnf.add_implication(&[Lit::pos(p), Lit::pos(y)], &[Lit::pos(c)]);
        }
    }
}

fn encode_word(
    cnf: &mut Cnf,
    word: &Word,
    labels: &[Vec<(Op, Var)>],
    left: &[Vec<Var>],
    right: &[Vec<Var>],
) -> Vec<Vec<Var>> {
    let m = word.len();
    let mut tracks: Vec<Vec<Var>> = Vec::with_capacity(labels.len());
    for i in 0..labels.len() {
        let fresh = |cnf: &mut Cnf, present: bool| -> Vec<Var> {
            if present {
                (0..m).map(|_| cnf.new_var()).collect()
            } else {
                Vec::new()
            }
        };
        let y = fresh(cnf, true);
        let l = fresh(cnf, !left[i].is_empty());
        let r = fresh(cnf, !right[i].is_empty());
        {
            let ys: Vec<&[Var]> = tracks.iter().map(Vec::as_slice).collect();
            link_child(cnf, &left[i], &l, &ys);
            link_child(cnf, &right[i], &r, &ys);
        }
        for &(op, x) in &labels[i] {
            encode_op(cnf, op, x, word, &y, &l, &r);
        }
        tracks.push(y);
    }
    tracks
}

/// Operator semantics at every position, guarded by the label variable `x`.
fn encode_op(cnf: &mut Cnf, op: Op, x: Var, word: &Word, y: &[Var], l: &[Var], r: &[Var]) {
    let g = [Lit::pos(x)];
    let m = y.len();
    let p = |v: Var| Lit::pos(v);
    let n = |v: Var| Lit::neg(v);
    for t in 0..m {
        let last = t + 1 == m;
        match op {
            Op::Atom(a) => cnf.add_implication(&g, &[Lit::new(y[t], word.symbols()[t] == a)]),
            Op::True => cnf.add_implication(&g, &[p(y[t])]),
            Op::False => cnf.add_implication(&g, &[n(y[t])]),
            Op::Not => {
                cnf.add_implication(&g, &[n(y[t]), n(l[t])]);
                cnf.add_implication(&g, &[p(y[t]), p(l[t])]);
            }
            Op::And => {
                cnf.add_implication(&g, &[n(y[t]), p(l[t])]);
                cnf.add_implication(&g, &[n(y[t]), p(r[t])]);
                cnf.add_implication(&g, &[p(y[t]), n(l[t]), n(r[t])]);
            }
            Op::Or => {
                cnf.add_implication(&g, &[n(y[t]), p(l[t]), p(r[t])]);
                cnf.add_implication(&g, &[p(y[t]), n(l[t])]);
                cnf.add_implication(&g, &[p(y[t]), n(r[t])]);
            }
            Op::Implies => {
                cnf.add_implication(&g, &[n(y[t]), n(l[t]), p(r[t])]);
                cnf.add_implication(&g, &[p(y[t]), p(l[t])]);
                cnf.add_implication(&g, &[p(y[t]), n(r[t])]);
            }
            Op::Next => {
                if last {
                    cnf.add_implication(&g, &[n(y[t])]);
                } else {
                    cnf.add_implication(&g, &[n(y[t]), p(l[t + 1])]);
                    cnf.add_implication(&g, &[p(y[t]), n(l[t + 1])]);
                }
            }
            Op::Finally => {
                if last {
                    cnf.add_implication(&g, &[n(y[t]), p(l[t])]);
                    cnf.add_implication(&g, &[p(y[t]), n(l[t])]);
                } else {
                    cnf.add_implication(&g, &[n(y[t]), p(l[t]), p(y[t + 1])]);
                    cnf.add_implication(&g, &[p(y[t]), n(l[t])]);
                    cnf.add_implication(&g, &[p(y[t]), n(y[t + 1])]);
                }
            }
            Op::Globally => {
                if last {
                    cnf.add_implication(&g, &[n(y[t]), p(l[t])]);
                    cnf.add_implication(&g, &[p(y[t]), n(l[t])]);
                } else {
                    cnf.add_implication(&g, &[n(y[t]), p(l[t])]);
                    cnf.add_implication(&g, &[n(y[t]), p(y[t + 1])]);
                    cnf.add_implication(&g, &[p(y[t]), n(l[t]), n(y[t + 1])]);
                }
            }
            Op::Until => {
                if last {
                    cnf.add_implication(&g, &[n(y[t]), p(r[t])]);
                    cnf.add_implication(&g, &[p(y[t]), n(r[t])]);
                } else {
                    cnf.add_implication(&g, &[n(y[t]), p(r[t]), p(l[t])]);
                    cnf.add_implication(&g, &[n(y[t]), p(r[t]), p(y[t + 1])]);
                    cnf.add_implication(&g, &[p(y[t]), n(r[t])]);
                    cnf.add_implication(&g, &[p(y[t]), n(l[t]), n(y[t + 1])]);
                }
            }
        }
    }
}

/// Per-node value on the empty word; returns the `e[i]` variables.
fn encode_empty(
    cnf: &mut Cnf,
    labels: &[Vec<(Op, Var)>],
    left: &[Vec<Var>],
    right: &[Vec<Var>],
) -> Vec<Var> {
    let mut e: Vec<Var> = Vec::with_capacity(labels.len());
    for i in 0..labels.len() {
        let ei = cnf.new_var();
        let el = (!left[i].is_empty()).then(|| cnf.new_var());
        let er = (!right[i].is_empty()).then(|| cnf.new_var());
        if let Some(el) = el {
            let children: Vec<&[Var]> = e.iter().map(std::slice::from_ref).collect();
            link_child(cnf, &left[i], &[el], &children);
        }
        if let Some(er) = er {
            let children: Vec<&[Var]> = e.iter().map(std::slice::from_ref).collect();
            link_child(cnf, &right[i], &[er], &children);
        }
        for &(op, x) in &labels[i] {
            let g = [Lit::pos(x)];
            let (p, n) = (Lit::pos, Lit::neg);
            match op {
                Op::Atom(_) | Op::False | Op::Next | Op::Finally | Op::Until => {
                    cnf.add_implication(&g, &[n(ei)])
                }
                Op::True | Op::Globally => cnf.add_implication(&g, &[p(ei)]),
                Op::Not => {
                    let l = el.expect("left copy");
                    cnf.add_implication(&g, &[n(ei), n(l)]);
                    cnf.add_implication(&g, &[p(ei), p(l)]);
                }
                Op::And => {
                    let (l, r) = (el.expect("left copy"), er.expect("right copy"));
                    cnf.add_implication(&g, &[n(ei), p(l)]);
                    cnf.add_implication(&g, &[n(ei), p(r)]);
                    cnf.add_implication(&g, &[p(ei), n(l), n(r)]);
                }
                Op::Or => {
                    let (l, r) = (el.expect("left copy"), er.expect("right copy"));
                    cnf.add_implication(&g, &[n(ei), p(l), p(r)]);
                    cnf.add_implication(&g, &[p(ei), n(l)]);
                    cnf.add_implication(&g, &[p(ei), n(r)]);
                }
                Op::Implies => {
                    let (l, r) = (el.expect("left copy"), er.expect("right copy"));
                    cnf.add_implication(&g, &[n(ei), n(l), p(r)]);
                    cnf.add_implication(&g, &[p(ei), p(l)]);
                    cnf.add_implication(&g, &[p(ei), n(r)]);
                }
            }
        }
        e.push(ei);
    }
    e
}
