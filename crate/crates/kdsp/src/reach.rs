//! Colour-DAG reachability with forbidden vertex sets, backed by a bit
//! matrix. Built once per (colour, forbidden set) and queried in O(1).

use std::collections::BTreeSet;

use crate::graph::{Colour, ShortestGraph, Vertex};

/// Square boolean matrix with u64-packed rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        BitMatrix { n, words, bits: vec![0; n * words] }
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.words + col / 64] >> (col % 64) & 1 == 1
    }

    pub fn set(&mut self, row: usize, col: usize) {
        self.bits[row * self.words + col / 64] |= 1 << (col % 64);
    }

    /// `row dst |= row src`; the rows must be distinct.
    pub fn or_row(&mut self, dst: usize, src: usize) {
        assert_ne!(dst, src);
        let w = self.words;
        let (dst_row, src_row) = if dst < src {
            let (head, tail) = self.bits.split_at_mut(src * w);
            (&mut head[dst * w..(dst + 1) * w], &tail[..w])
        } else {
            let (head, tail) = self.bits.split_at_mut(dst * w);
            (&mut tail[..w], &head[src * w..(src + 1) * w])
        };
        for (d, s) in dst_row.iter_mut().zip(src_row) {
            *d |= s;
        }
    }
}

/// Reachability along oriented colour edges, restricted to vertices outside a
/// forbidden set. `can_reach(u, v)` answers: is there a colour path from `u`
/// to `v` that avoids the forbidden vertices entirely — endpoints included?
///
/// Consequently `can_reach(u, u)` holds exactly when `u` is levelled for the
/// colour and not forbidden.
#[derive(Debug, Clone)]
pub struct ReachIndex {
    colour: Colour,
    matrix: BitMatrix,
}

impl ReachIndex {
    pub fn build(sg: &ShortestGraph, colour: Colour, forbidden: &BTreeSet<Vertex>) -> Self {
        let n = sg.vertex_count();
        let mut matrix = BitMatrix::new(n);
        // Sweep levelled vertices from high level to low; every colour
        // out-neighbour is processed before its predecessors.
        let order = sg.colour_topological(colour);
        for &u in order.iter().rev() {
            if forbidden.contains(&u) {
                continue;
            }
            matrix.set(u, u);
            for v in sg.colour_out_neighbours(colour, u) {
                if !forbidden.contains(&v) {
                    matrix.or_row(u, v);
                }
            }
        }
        ReachIndex { colour, matrix }
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    pub fn colour(&self) -> Colour {
        self.colour
    }

    pub fn can_reach(&self, u: Vertex, v: Vertex) -> bool {
        self.matrix.get(u, v)
    }
}
