//! Statevector with lazy qubit materialization.
//!
//! Amplitudes are stored only for qubits that have left |0>: a qubit joins
//! the active set on first touch (doubling the vector with a zero upper
//! half) and leaves it at `reset`, which restores an exact product |0> and
//! halves the vector. This is plain product-state factoring — no
//! approximation — and it is what makes wide distributed circuits cheap:
//! remote-CX blocks are emitted contiguously, so at most two communication
//! qubits are ever non-|0> at once regardless of the declared width.
//!
//! Qubit 0 is the least significant bit of a computational-basis index.

use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

pub const MAX_WIDTH: usize = 26;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone)]
pub struct StateVector {
    num_qubits: usize,
    /// physical qubit -> bit position in `amps` indices, if active.
    slot_of: Vec<Option<usize>>,
    /// bit position -> physical qubit.
    active: Vec<usize>,
    /// 2^active.len() amplitudes.
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0…0> over `num_qubits` wires (stored as a single amplitude until
    /// gates touch qubits).
    pub fn new(num_qubits: usize) -> Result<Self> {
        if num_qubits > MAX_WIDTH {
            return Err(Error::WidthTooLarge {
                width: num_qubits,
                max: MAX_WIDTH,
            });
        }
        Ok(StateVector {
            num_qubits,
            slot_of: vec![None; num_qubits],
            active: Vec::new(),
            amps: vec![ONE],
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Number of currently materialized qubits.
    pub fn active_qubits(&self) -> usize {
        self.active.len()
    }

    pub fn slot_of(&self, qubit: usize) -> Option<usize> {
        self.slot_of[qubit]
    }

    /// Amplitude at an index expressed over the *active slots*.
    pub fn slot_amp(&self, slot_index: usize) -> Complex64 {
        self.amps[slot_index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Expand to a dense vector over all declared qubits (index bit q =
    /// physical qubit q). Intended for references and tests; width-capped by
    /// the same 26-qubit bound as everything else.
    pub fn dense(&self) -> Vec<Complex64> {
        let mut full = vec![ZERO; 1usize << self.num_qubits];
        for (k, &amp) in self.amps.iter().enumerate() {
            let mut idx = 0usize;
            for (slot, &q) in self.active.iter().enumerate() {
                if (k >> slot) & 1 == 1 {
                    idx |= 1 << q;
                }
            }
            full[idx] = amp;
        }
        full
    }

    fn ensure_active(&mut self, qubit: usize) -> usize {
        debug_assert!(qubit < self.num_qubits);
        if let Some(slot) = self.slot_of[qubit] {
            return slot;
        }
        let slot = self.active.len();
        self.slot_of[qubit] = Some(slot);
        self.active.push(qubit);
        self.amps.resize(self.amps.len() * 2, ZERO);
        slot
    }

    /// Drop an active slot whose qubit is in an exact product |0>.
    fn deactivate(&mut self, slot: usize) {
        let bit = 1usize << slot;
        debug_assert!(
            self.amps
                .iter()
                .enumerate()
                .all(|(i, a)| i & bit == 0 || *a == ZERO),
            "deactivating a slot that still holds amplitude"
        );
        let half = self.amps.len() / 2;
        let low_mask = bit - 1;
        let mut out = Vec::with_capacity(half);
        for j in 0..half {
            let idx = (j & low_mask) | ((j & !low_mask) << 1);
            out.push(self.amps[idx]);
        }
        self.amps = out;
        let q = self.active.remove(slot);
        self.slot_of[q] = None;
        for &moved in &self.active[slot..] {
            let s = self.slot_of[moved].expect("active qubit has a slot");
            self.slot_of[moved] = Some(s - 1);
        }
    }

    #[inline]
    fn for_pairs(&mut self, slot: usize, mut f: impl FnMut(&mut Complex64, &mut Complex64)) {
        let bit = 1usize << slot;
        let len = self.amps.len();
        let mut base = 0;
        while base < len {
            for off in 0..bit {
                let i = base + off;
                let (lo, hi) = self.amps.split_at_mut(i + bit);
                f(&mut lo[i], &mut hi[0]);
            }
            base += bit << 1;
        }
    }

    pub fn apply_x(&mut self, q: usize) {
        let s = self.ensure_active(q);
        self.for_pairs(s, std::mem::swap);
    }

    pub fn apply_y(&mut self, q: usize) {
        let s = self.ensure_active(q);
        let i = Complex64::new(0.0, 1.0);
        self.for_pairs(s, |a, b| {
            let (x, y) = (*a, *b);
            *a = -i * y;
            *b = i * x;
        });
    }

    pub fn apply_z(&mut self, q: usize) {
        let s = self.ensure_active(q);
        self.for_pairs(s, |_, b| *b = -*b);
    }

    pub fn apply_h(&mut self, q: usize) {
        let s = self.ensure_active(q);
        self.for_pairs(s, |a, b| {
            let (x, y) = (*a, *b);
            *a = (x + y) * FRAC_1_SQRT_2;
            *b = (x - y) * FRAC_1_SQRT_2;
        });
    }

    /// RZ(theta) = diag(e^{-i theta/2}, e^{+i theta/2}).
    pub fn apply_rz(&mut self, q: usize, theta: f64) {
        let s = self.ensure_active(q);
        let m = Complex64::from_polar(1.0, -theta / 2.0);
        let p = Complex64::from_polar(1.0, theta / 2.0);
        self.for_pairs(s, |a, b| {
            *a *= m;
            *b *= p;
        });
    }

    pub fn apply_ry(&mut self, q: usize, theta: f64) {
        let s = self.ensure_active(q);
        let (sin, cos) = (theta / 2.0).sin_cos();
        self.for_pairs(s, |a, b| {
            let (x, y) = (*a, *b);
            *a = cos * x - sin * y;
            *b = sin * x + cos * y;
        });
    }

    pub fn apply_rx(&mut self, q: usize, theta: f64) {
        let s = self.ensure_active(q);
        let (sin, cos) = (theta / 2.0).sin_cos();
        let misin = Complex64::new(0.0, -sin);
        self.for_pairs(s, |a, b| {
            let (x, y) = (*a, *b);
            *a = cos * x + misin * y;
            *b = misin * x + cos * y;
        });
    }

    pub fn apply_cx(&mut self, c: usize, t: usize) {
        let sc = self.ensure_active(c);
        let st = self.ensure_active(t);
        let (cb, tb) = (1usize << sc, 1usize << st);
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) {
        let sa = self.ensure_active(a);
        let sb = self.ensure_active(b);
        let mask = (1usize << sa) | (1usize << sb);
        for i in 0..self.amps.len() {
            if i & mask == mask {
                self.amps[i] = -self.amps[i];
            }
        }
    }

    pub fn apply_ccx(&mut self, c0: usize, c1: usize, t: usize) {
        let s0 = self.ensure_active(c0);
        let s1 = self.ensure_active(c1);
        let st = self.ensure_active(t);
        let cmask = (1usize << s0) | (1usize << s1);
        let tb = 1usize << st;
        for i in 0..self.amps.len() {
            if i & cmask == cmask && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
    }

    /// Phase flip on the all-ones subspace of `qubits`.
    pub fn apply_mcz(&mut self, qubits: &[usize]) {
        let mut mask = 0usize;
        for &q in qubits {
            mask |= 1 << self.ensure_active(q);
        }
        for i in 0..self.amps.len() {
            if i & mask == mask {
                self.amps[i] = -self.amps[i];
            }
        }
    }

    /// Born-rule measurement: collapse `q` and return the outcome.
    pub fn measure(&mut self, q: usize, rng: &mut impl Rng) -> bool {
        let s = self.ensure_active(q);
        let bit = 1usize << s;
        let p_one: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        let outcome = rng.random::<f64>() < p_one;
        let keep = if outcome { p_one } else { 1.0 - p_one };
        let scale = 1.0 / keep.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & bit != 0) == outcome {
                *a *= scale;
            } else {
                *a = ZERO;
            }
        }
        outcome
    }

    /// Collapse `q` and return it to |0>, then drop it from the active set.
    pub fn reset(&mut self, q: usize, rng: &mut impl Rng) {
        let s = self.ensure_active(q);
        if self.measure(q, rng) {
            self.apply_x(q);
        }
        // After the collapse (and flip) the bit-1 half is exactly zero.
        self.deactivate(s);
    }

    #[cfg(debug_assertions)]
    pub(crate) fn debug_check_norm(&self) {
        // Rounding accumulates to ~1e-9 over a few hundred instructions;
        // actual bookkeeping bugs show up orders of magnitude above this.
        let n = self.norm_sqr();
        debug_assert!((n - 1.0).abs() < 1e-6, "statevector norm drifted to {n}");
    }
}
