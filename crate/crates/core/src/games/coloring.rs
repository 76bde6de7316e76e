//! Colourings of the graph on `{0,1}^n` whose edges join strings at Hamming
//! distance `n/2`. A proper colouring with `n` colours is a classical
//! winning strategy for the Deutsch-Jozsa game: both players output the
//! colour of their input.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};

/// String lengths the search accepts.
pub const SUPPORTED_N: [usize; 4] = [2, 4, 8, 16];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    n: usize,
    /// `colors[v]` for each string `v` read as a big-endian integer.
    colors: Vec<u16>,
}

fn check_n(n: usize) -> Result<()> {
    if !SUPPORTED_N.contains(&n) {
        return Err(Error::domain(format!("n = {n} not in {SUPPORTED_N:?}")));
    }
    Ok(())
}

/// All `n`-bit masks of weight `n/2`: the neighbourhood offsets of every vertex.
fn half_weight_masks(n: usize) -> Vec<usize> {
    (0..1usize << n)
        .filter(|v| v.count_ones() as usize == n / 2)
        .collect()
}

impl Coloring {
    /// Checks shape and colour range only; properness is checked by
    /// [`Coloring::conflict`] and by strategy construction.
    pub fn new(n: usize, colors: Vec<u16>) -> Result<Self> {
        check_n(n)?;
        if colors.len() != 1 << n {
            return Err(Error::domain(format!(
                "{} colours for {} strings",
                colors.len(),
                1usize << n
            )));
        }
        if colors.iter().any(|&c| c as usize >= n) {
            return Err(Error::domain(format!("colours must lie in [0, {n})")));
        }
        Ok(Coloring { n, colors })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn color(&self, v: usize) -> u16 {
        self.colors[v]
    }

    pub fn color_of(&self, x: &BitString) -> u16 {
        self.colors[x.to_index()]
    }

    pub fn colors(&self) -> &[u16] {
        &self.colors
    }

    pub fn num_colors_used(&self) -> usize {
        let mut seen = vec![false; self.n];
        for &c in &self.colors {
            seen[c as usize] = true;
        }
        seen.iter().filter(|&&s| s).count()
    }

    /// First pair of strings at distance `n/2` sharing a colour, if any.
    pub fn conflict(&self) -> Option<(usize, usize)> {
        let masks = half_weight_masks(self.n);
        for v in 0..self.colors.len() {
            for &mask in &masks {
                let w = v ^ mask;
                if w > v && self.colors[v] == self.colors[w] {
                    return Some((v, w));
                }
            }
        }
        None
    }

    pub fn is_proper(&self) -> bool {
        self.conflict().is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColoringSearch {
    Found(Coloring),
    /// The search space was exhausted: no colouring with this many colours exists.
    Refuted,
    /// Out of time before either finding a colouring or exhausting the search.
    BudgetExhausted,
}

#[derive(Clone, Debug)]
pub struct ColoringOutcome {
    pub result: ColoringSearch,
    /// Colour assignments tried.
    pub nodes: u64,
    pub elapsed: Duration,
}

impl ColoringOutcome {
    pub fn coloring(&self) -> Option<&Coloring> {
        match &self.result {
            ColoringSearch::Found(c) => Some(c),
            _ => None,
        }
    }
}

struct Search {
    k: usize,
    masks: Vec<usize>,
    color: Vec<i16>,
    /// `counts[v*k + c]`: coloured neighbours of `v` with colour `c`.
    counts: Vec<u32>,
    saturation: Vec<u16>,
    colored: usize,
}

impl Search {
    fn assign(&mut self, v: usize, c: usize) {
        self.color[v] = c as i16;
        self.colored += 1;
        for &mask in &self.masks {
            let slot = (v ^ mask) * self.k + c;
            if self.counts[slot] == 0 {
                self.saturation[v ^ mask] += 1;
            }
            self.counts[slot] += 1;
        }
    }

    fn unassign(&mut self, v: usize) {
        let c = self.color[v] as usize;
        self.color[v] = -1;
        self.colored -= 1;
        for &mask in &self.masks {
            let slot = (v ^ mask) * self.k + c;
            self.counts[slot] -= 1;
            if self.counts[slot] == 0 {
                self.saturation[v ^ mask] -= 1;
            }
        }
    }

    /// Uncoloured vertex with the most distinct neighbour colours; lowest index on ties.
    fn pick(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for v in 0..self.color.len() {
            if self.color[v] >= 0 {
                continue;
            }
            if best.is_none_or(|b| self.saturation[v] > self.saturation[b]) {
                best = Some(v);
            }
        }
        best
    }
}

struct Frame {
    v: usize,
    next: usize,
    /// Highest colour index in use before this vertex was coloured.
    max_before: i32,
}

/// Exact backtracking with most-constrained-vertex ordering.
///
/// String `0…0` is pinned to colour 0 and each vertex may open at most one
/// new colour, which removes colour-permutation symmetry without losing
/// completeness, so [`ColoringSearch::Refuted`] is a proof of non-existence.
pub fn find_coloring(n: usize, num_colors: usize, budget: Duration) -> Result<ColoringOutcome> {
    check_n(n)?;
    if num_colors == 0 || num_colors > n {
        return Err(Error::domain(format!(
            "need between 1 and {n} colours, got {num_colors}"
        )));
    }
    let start = Instant::now();
    let vertices = 1usize << n;
    let k = num_colors;
    let mut s = Search {
        k,
        masks: half_weight_masks(n),
        color: vec![-1; vertices],
        counts: vec![0; vertices * k],
        saturation: vec![0; vertices],
        colored: 0,
    };
    let finish = |result, nodes| {
        Ok(ColoringOutcome {
            result,
            nodes,
            elapsed: start.elapsed(),
        })
    };

    s.assign(0, 0);
    let mut nodes: u64 = 1;
    let mut max_used: i32 = 0;
    let mut stack: Vec<Frame> = Vec::new();
    if let Some(v) = s.pick() {
        stack.push(Frame { v, next: 0, max_before: max_used });
    }

    while let Some(frame) = stack.last_mut() {
        if nodes.is_multiple_of(64) && start.elapsed() >= budget {
            return finish(ColoringSearch::BudgetExhausted, nodes);
        }
        let v = frame.v;
        if s.color[v] >= 0 {
            s.unassign(v);
            max_used = frame.max_before;
        }
        let limit = ((frame.max_before + 1) as usize).min(k - 1);
        let choice = (frame.next..=limit).find(|&c| s.counts[v * k + c] == 0);
        match choice {
            None => {
                stack.pop();
            }
            Some(c) => {
                frame.next = c + 1;
                s.assign(v, c);
                nodes += 1;
                max_used = max_used.max(c as i32);
                match s.pick() {
                    None => break,
                    Some(w) => stack.push(Frame { v: w, next: 0, max_before: max_used }),
                }
            }
        }
    }

    if s.colored == vertices {
        let colors = s.color.iter().map(|&c| c as u16).collect();
        let coloring = Coloring::new(n, colors)?;
        if let Some((u, w)) = coloring.conflict() {
            return Err(Error::Consistency(format!(
                "search produced an improper colouring ({u}, {w})"
            )));
        }
        return finish(ColoringSearch::Found(coloring), nodes);
    }
    finish(ColoringSearch::Refuted, nodes)
}
