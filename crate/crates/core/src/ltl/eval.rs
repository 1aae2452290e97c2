use std::collections::HashMap;

use super::{Formula, Op};
use crate::alphabet::Word;

/// A formula flattened into its syntax DAG, nodes in bottom-up order.
#[derive(Clone, Debug)]
pub struct CompiledFormula {
    nodes: Vec<Node>,
}

#[derive(Clone, Copy, Debug)]
struct Node {
    op: Op,
    left: usize,
    right: usize,
}

impl CompiledFormula {
    pub fn new(phi: &Formula) -> Self {
        let mut index: HashMap<&Formula, usize> = HashMap::new();
        let mut nodes = Vec::new();
        fn visit<'a>(f: &'a Formula, index: &mut HashMap<&'a Formula, usize>, nodes: &mut Vec<Node>) -> usize {
            if let Some(&i) = index.get(f) {
                return i;
            }
            let (l, r) = f.children();
            let left = l.map_or(usize::MAX, |l| visit(l, index, nodes));
            let right = r.map_or(usize::MAX, |r| visit(r, index, nodes));
            nodes.push(Node { op: f.op(), left, right });
            index.insert(f, nodes.len() - 1);
            nodes.len() - 1
        }
        visit(phi, &mut index, &mut nodes);
        CompiledFormula { nodes }
    }

    /// Number of DAG nodes, which is the formula size.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Column-major table: `cols[χ][t - 1]` holds `(u, t) ⊨ χ`.
    fn columns(&self, word: &Word) -> Vec<Vec<bool>> {
        let m = word.len();
        let mut cols: Vec<Vec<bool>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let mut col = vec![false; m];
            let l = |t: usize| cols[node.left][t];
            let r = |t: usize| cols[node.right][t];
            match node.op {
                Op::Atom(a) => {
                    for (t, s) in word.iter().enumerate() {
                        col[t] = s == a;
                    }
                }
                Op::True => col.fill(true),
                Op::False => {}
                Op::Not => (0..m).for_each(|t| col[t] = !l(t)),
                Op::And => (0..m).for_each(|t| col[t] = l(t) && r(t)),
                Op::Or => (0..m).for_each(|t| col[t] = l(t) || r(t)),
                Op::Implies => (0..m).for_each(|t| col[t] = !l(t) || r(t)),
                Op::Next => (0..m.saturating_sub(1)).for_each(|t| col[t] = l(t + 1)),
                Op::Finally => {
                    let mut acc = false;
                    for t in (0..m).rev() {
                        acc = l(t) || acc;
                        col[t] = acc;
                    }
                }
                Op::Globally => {
                    let mut acc = true;
                    for t in (0..m).rev() {
                        acc = l(t) && acc;
                        col[t] = acc;
                    }
                }
                Op::Until => {
                    let mut acc = false;
                    for t in (0..m).rev() {
                        acc = r(t) || (l(t) && acc);
                        col[t] = acc;
                    }
                }
            }
            cols.push(col);
        }
        cols
    }

    /// Value of the whole formula on the empty word.
    pub fn empty_value(&self) -> bool {
        let mut vals: Vec<bool> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let l = node.left != usize::MAX && vals[node.left];
            let r = node.right != usize::MAX && vals[node.right];
            vals.push(node.op.empty_value(l, r));
        }
        *vals.last().expect("compiled formula has a root")
    }

    /// `word ⊨ φ`, i.e. satisfaction at position 1 (or the empty-word valuation).
    pub fn satisfies(&self, word: &Word) -> bool {
        if word.is_empty() {
            return self.empty_value();
        }
        self.columns(word).last().expect("root column")[0]
    }
}

/// The dynamic-programming table `τ[t, χ]` for one word and one formula.
#[derive(Clone, Debug)]
pub struct EvalTable {
    subformulas: Vec<Formula>,
    index: HashMap<Formula, usize>,
    cols: Vec<Vec<bool>>,
    len: usize,
}

impl EvalTable {
    /// Subformulas labelling the columns, bottom-up.
    pub fn subformulas(&self) -> &[Formula] {
        &self.subformulas
    }

    /// Number of position rows (the word length).
    pub fn positions(&self) -> usize {
        self.len
    }

    /// Entry for 1-indexed position `t` and column `chi`.
    pub fn get(&self, t: usize, chi: usize) -> bool {
        assert!(t >= 1 && t <= self.len, "position {t} out of range 1..={}", self.len);
        self.cols[chi][t - 1]
    }

    /// Entry for 1-indexed position `t` and the given subformula, if it is one.
    pub fn value(&self, t: usize, sub: &Formula) -> Option<bool> {
        self.index.get(sub).map(|&chi| self.get(t, chi))
    }

    /// Row at position `t`, one entry per subformula.
    pub fn row(&self, t: usize) -> Vec<bool> {
        (0..self.cols.len()).map(|chi| self.get(t, chi)).collect()
    }
}

pub fn evaluate(phi: &Formula, word: &Word) -> EvalTable {
    let compiled = CompiledFormula::new(phi);
    let cols = compiled.columns(word);
    let subformulas = phi.subformulas();
    debug_assert_eq!(subformulas.len(), cols.len());
    let index = subformulas
        .iter()
        .enumerate()
        .map(|(i, f)| (f.clone(), i))
        .collect();
    EvalTable { subformulas, index, cols, len: word.len() }
}

pub fn satisfies(phi: &Formula, word: &Word) -> bool {
    CompiledFormula::new(phi).satisfies(word)
}

pub fn satisfies_empty(phi: &Formula) -> bool {
    CompiledFormula::new(phi).empty_value()
}
