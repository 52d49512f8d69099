//! Indexed binary max-heap over variables keyed by activity.
//!
//! Ordering is by activity descending, then variable index ascending, so
//! ties always resolve to the lowest-numbered variable.

use crate::cnf::Var;

const ABSENT: usize = usize::MAX;

#[derive(Debug, Clone, Default)]
pub(crate) struct VarOrder {
    heap: Vec<Var>,
    pos: Vec<usize>,
}

#[inline]
fn before(act: &[f64], a: Var, b: Var) -> bool {
    let (x, y) = (act[a.index()], act[b.index()]);
    x > y || (x == y && a < b)
}

impl VarOrder {
    pub fn new(num_vars: usize) -> VarOrder {
        VarOrder {
            heap: Vec::with_capacity(num_vars),
            pos: vec![ABSENT; num_vars],
        }
    }

    #[cfg(test)]
    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn contains(&self, v: Var) -> bool {
        self.pos[v.index()] != ABSENT
    }

    pub fn insert(&mut self, v: Var, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.pos[v.index()] = self.heap.len();
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1, act);
    }

    pub fn remove(&mut self, v: Var, act: &[f64]) {
        let i = self.pos[v.index()];
        if i == ABSENT {
            return;
        }
        let last = self.heap.pop().expect("nonempty");
        self.pos[v.index()] = ABSENT;
        if i < self.heap.len() {
            self.heap[i] = last;
            self.pos[last.index()] = i;
            self.sift_up(i, act);
            let i = self.pos[last.index()];
            self.sift_down(i, act);
        }
    }

    pub fn peek(&self) -> Option<Var> {
        self.heap.first().copied()
    }

    /// Restores heap order after `v`'s activity increased.
    pub fn increased(&mut self, v: Var, act: &[f64]) {
        let i = self.pos[v.index()];
        if i != ABSENT {
            self.sift_up(i, act);
        }
    }

    pub fn rebuild(&mut self, vars: impl IntoIterator<Item = Var>, act: &[f64]) {
        for v in self.heap.drain(..) {
            self.pos[v.index()] = ABSENT;
        }
        for v in vars {
            self.pos[v.index()] = self.heap.len();
            self.heap.push(v);
        }
        for i in (0..self.heap.len() / 2).rev() {
            self.sift_down(i, act);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Var> + '_ {
        self.heap.iter().copied()
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if !before(act, v, p) {
                break;
            }
            self.heap[i] = p;
            self.pos[p.index()] = i;
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v.index()] = i;
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let child = if r < n && before(act, self.heap[r], self.heap[l]) {
                r
            } else {
                l
            };
            let c = self.heap[child];
            if !before(act, c, v) {
                break;
            }
            self.heap[i] = c;
            self.pos[c.index()] = i;
            i = child;
        }
        self.heap[i] = v;
        self.pos[v.index()] = i;
    }
}
