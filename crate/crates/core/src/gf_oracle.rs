//! Linear-algebra audit of the set-level model.
//!
//! Every transmission is a GF(2^8) linear equation over source packets. A
//! receiver that knows its Has set can cancel those variables, so all
//! decodability questions reduce to row ranks over the remaining variables.

use rand::Rng;

use crate::gf256;
use crate::model::ReceiverState;
use crate::packet_set::PacketSet;

/// A coded packet: nonzero coefficients on each member of `support`, in
/// ascending packet order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GfEquation {
    support: PacketSet,
    coeffs: Vec<u8>,
}

impl GfEquation {
    /// Returns `None` if the lengths disagree or any coefficient is zero.
    pub fn new(support: PacketSet, coeffs: Vec<u8>) -> Option<Self> {
        (coeffs.len() == support.len() && coeffs.iter().all(|&c| c != 0))
            .then_some(Self { support, coeffs })
    }

    pub fn support(&self) -> PacketSet {
        self.support
    }

    pub fn coeffs(&self) -> &[u8] {
        &self.coeffs
    }

    /// Coefficient on packet `p` (zero outside the support).
    pub fn coeff(&self, p: usize) -> u8 {
        self.support
            .iter()
            .position(|q| q == p)
            .map_or(0, |i| self.coeffs[i])
    }

    /// Row of coefficients over `vars` in ascending order. Known variables
    /// outside `vars` are treated as cancelled.
    pub fn restricted(&self, vars: &PacketSet) -> Vec<u8> {
        let mut row = Vec::with_capacity(vars.len());
        let mut it = self.support.iter().zip(&self.coeffs).peekable();
        for v in vars.iter() {
            while it.peek().is_some_and(|(p, _)| *p < v) {
                it.next();
            }
            match it.peek() {
                Some(&(p, &c)) if p == v => row.push(c),
                _ => row.push(0),
            }
        }
        row
    }
}

/// Draws uniform nonzero coefficients for `support`.
///
/// # Panics
/// On an empty support.
pub fn fresh_equation<R: Rng + ?Sized>(support: PacketSet, rng: &mut R) -> GfEquation {
    assert!(!support.is_empty(), "coded packet needs a nonempty support");
    let coeffs = (0..support.len())
        .map(|_| rng.gen_range(1..=255u8))
        .collect();
    GfEquation { support, coeffs }
}

/// Equations restricted to a fixed variable set; columns follow ascending
/// packet index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GfMatrix {
    vars: PacketSet,
    rows: Vec<Vec<u8>>,
}

impl GfMatrix {
    pub fn new(vars: PacketSet) -> Self {
        Self {
            vars,
            rows: Vec::new(),
        }
    }

    pub fn from_equations<'a>(
        vars: PacketSet,
        eqs: impl IntoIterator<Item = &'a GfEquation>,
    ) -> Self {
        let mut m = Self::new(vars);
        for e in eqs {
            m.push(e);
        }
        m
    }

    pub fn push(&mut self, eq: &GfEquation) {
        self.rows.push(eq.restricted(&self.vars));
    }

    /// Appends a raw row; must have one entry per variable.
    pub fn push_row(&mut self, row: Vec<u8>) {
        assert_eq!(row.len(), self.vars.len());
        self.rows.push(row);
    }

    pub fn vars(&self) -> PacketSet {
        self.vars
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    pub fn rank(&self) -> usize {
        rank(self)
    }

    /// True if the rows pin down some single variable on their own.
    pub fn determines_a_variable(&self) -> bool {
        let base = self.rank();
        let n = self.vars.len();
        (0..n).any(|c| {
            let mut m = self.clone();
            let mut unit = vec![0; n];
            unit[c] = 1;
            m.push_row(unit);
            m.rank() == base
        })
    }
}

/// Row rank over GF(2^8) by Gaussian elimination.
pub fn rank(mat: &GfMatrix) -> usize {
    let cols = mat.vars.len();
    let mut rows = mat.rows.clone();
    let mut r = 0;
    for c in 0..cols {
        let Some(pivot) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, pivot);
        let inv = gf256::inv(rows[r][c]);
        for v in rows[r].iter_mut() {
            *v = gf256::mul(*v, inv);
        }
        let (head, tail) = rows.split_at_mut(r + 1);
        let prow = &head[r];
        for row in tail.iter_mut() {
            let f = row[c];
            if f != 0 {
                for (x, &p) in row.iter_mut().zip(prow) {
                    *x ^= gf256::mul(f, p);
                }
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

/// Checks a receiver's vertex against its stored equations: the equations
/// over the vertex's unknowns have rank `|x| - 1`, and a generic extra
/// equation supported on `x` completes the system.
pub fn verify_vertex(receiver: &ReceiverState, vertex: usize) -> bool {
    let Some(stored) = receiver.stored_equations() else {
        return false;
    };
    let Some(&x) = receiver.vertex_sets().get(vertex) else {
        return false;
    };
    let known = receiver.has();
    let own: Vec<&GfEquation> = stored
        .iter()
        .filter(|e| {
            let unknown = e.support().difference(&known);
            !unknown.is_empty() && unknown.is_subset(&x)
        })
        .collect();
    let dim = x.len();
    let mut mat = GfMatrix::from_equations(x, own.iter().copied());
    if mat.rank() != dim - 1 {
        return false;
    }
    // Probe with a fixed generic row; a full-support probe misses the
    // complement of a hyperplane only with probability 1/255 per trial.
    let mut state: u32 = 0x9e37_79b9 ^ dim as u32;
    for _ in 0..4 {
        let row = (0..dim)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 17;
                state ^= state << 5;
                (state % 255) as u8 + 1
            })
            .collect();
        mat.push_row(row);
        if mat.rank() == dim {
            return true;
        }
        mat.rows.pop();
    }
    false
}
