//! Helpers shared by the integration tests: a cell-by-cell Tetris reference,
//! random boards, toy MDPs and synthetic choice data.
#![allow(dead_code)]

use ipse::choice::ChoiceSet;
use ipse::env::{CallMeter, Candidate, Environment, FeatureEnvironment, Transition};
use ipse::features::{FeatureVector, NUM_FEATURES};
use ipse::policy::Policy;
use ipse::tetris::{ActionPlacement, Board, Piece, HEIGHT, WIDTH};
use rand::{Rng, RngCore};
use std::convert::Infallible;

pub type Grid = [[bool; WIDTH]; HEIGHT];

pub fn grid_of(board: &Board) -> Grid {
    let mut g = [[false; WIDTH]; HEIGHT];
    for (r, row) in g.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            *cell = board.is_occupied(r, c);
        }
    }
    g
}

pub fn board_of(grid: &Grid) -> Board {
    let mut b = Board::empty();
    for (r, row) in grid.iter().enumerate() {
        for (c, &cell) in row.iter().enumerate() {
            b.set(r, c, cell);
        }
    }
    b
}

/// Drops the piece straight down from above the board, one row at a time.
/// Returns the resting (row, column) cells, or `None` if it does not fit.
pub fn naive_drop(grid: &Grid, piece: Piece, action: ActionPlacement) -> Option<Vec<(usize, usize)>> {
    let shape = piece.rotations().get(action.rotation as usize)?;
    let col = action.column as usize;
    if col + shape.width as usize > WIDTH {
        return None;
    }
    let free = |y: i64| {
        shape.cells.iter().all(|&(dc, dr)| {
            let r = y + dr as i64;
            r >= 0 && (r >= HEIGHT as i64 || !grid[r as usize][col + dc as usize])
        })
    };
    let mut y = HEIGHT as i64;
    while free(y - 1) {
        y -= 1;
    }
    let cells: Vec<(usize, usize)> = shape
        .cells
        .iter()
        .map(|&(dc, dr)| ((y + dr as i64) as usize, col + dc as usize))
        .collect();
    if cells.iter().any(|&(r, _)| r >= HEIGHT) {
        return None;
    }
    Some(cells)
}

/// Places the cells and removes full rows; returns the post board, lines
/// cleared and piece cells inside the cleared lines.
pub fn naive_apply(grid: &Grid, cells: &[(usize, usize)]) -> (Grid, usize, usize) {
    let mut g = *grid;
    for &(r, c) in cells {
        g[r][c] = true;
    }
    let full: Vec<bool> = g.iter().map(|row| row.iter().all(|&x| x)).collect();
    let cleared = full.iter().filter(|&&f| f).count();
    let piece_cells = cells.iter().filter(|&&(r, _)| full[r]).count();
    let mut post = [[false; WIDTH]; HEIGHT];
    let mut dst = 0;
    for r in 0..HEIGHT {
        if !full[r] {
            post[dst] = g[r];
            dst += 1;
        }
    }
    (post, cleared, piece_cells)
}

fn occupied(g: &Grid, r: i64, c: i64) -> bool {
    // walls and floor count as occupied, the space above the board as empty
    if c < 0 || c >= WIDTH as i64 || r < 0 {
        return true;
    }
    if r >= HEIGHT as i64 {
        return false;
    }
    g[r as usize][c as usize]
}

fn filled_above(g: &Grid, r: usize, c: usize) -> usize {
    (r + 1..HEIGHT).filter(|&rr| g[rr][c]).count()
}

/// The eight features by direct enumeration of cells.
pub fn naive_board_features(g: &Grid) -> [f64; 6] {
    let mut row_t = 0;
    for r in 0..HEIGHT as i64 {
        for c in -1..WIDTH as i64 {
            row_t += (occupied(g, r, c) != occupied(g, r, c + 1)) as usize;
        }
    }
    let mut col_t = 0;
    for c in 0..WIDTH as i64 {
        for r in -1..HEIGHT as i64 {
            col_t += (occupied(g, r, c) != occupied(g, r + 1, c)) as usize;
        }
    }
    let mut holes = 0;
    let mut depth = 0;
    let mut hole_rows = [false; HEIGHT];
    for r in 0..HEIGHT {
        for c in 0..WIDTH {
            let above = filled_above(g, r, c);
            if !g[r][c] && above > 0 {
                holes += 1;
                depth += above;
                hole_rows[r] = true;
            }
        }
    }
    let mut wells = 0;
    for c in 0..WIDTH {
        let mut run = 0;
        for r in (0..HEIGHT).rev() {
            let is_well = !g[r][c]
                && filled_above(g, r, c) == 0
                && occupied(g, r as i64, c as i64 - 1)
                && occupied(g, r as i64, c as i64 + 1);
            if is_well {
                run += 1;
                wells += run;
            } else {
                run = 0;
            }
        }
    }
    [
        row_t as f64,
        col_t as f64,
        holes as f64,
        wells as f64,
        depth as f64,
        hole_rows.iter().filter(|&&h| h).count() as f64,
    ]
}

/// Reference features of placing `piece` with `action` on `grid`.
pub fn naive_features(grid: &Grid, piece: Piece, action: ActionPlacement) -> Option<[f64; NUM_FEATURES]> {
    let cells = naive_drop(grid, piece, action)?;
    let lo = cells.iter().map(|c| c.0).min().unwrap();
    let hi = cells.iter().map(|c| c.0).max().unwrap();
    let (post, cleared, piece_cells) = naive_apply(grid, &cells);
    let b = naive_board_features(&post);
    Some([
        (lo + hi) as f64 / 2.0,
        (cleared * piece_cells) as f64,
        b[0],
        b[1],
        b[2],
        b[3],
        b[4],
        b[5],
    ])
}

/// A board with no full rows. Half the boards are random columns of varying
/// height with random gaps, so that holes, wells and overhangs occur; the
/// other half stack nearly complete rows so that placements clear lines.
pub fn random_board(rng: &mut impl Rng) -> Board {
    let mut g = [[false; WIDTH]; HEIGHT];
    if rng.gen_bool(0.5) {
        let max_h = rng.gen_range(0..=HEIGHT);
        for c in 0..WIDTH {
            let h = rng.gen_range(0..=max_h);
            let density = rng.gen_range(0.5..1.0);
            for row in g.iter_mut().take(h) {
                row[c] = rng.gen_bool(density);
            }
        }
    } else {
        let rows = rng.gen_range(1..HEIGHT - 1);
        let gap = rng.gen_range(0..WIDTH);
        for row in g.iter_mut().take(rows) {
            *row = [true; WIDTH];
            let g2 = if rng.gen_bool(0.7) { gap } else { rng.gen_range(0..WIDTH) };
            row[g2] = false;
            if rng.gen_bool(0.3) {
                row[rng.gen_range(0..WIDTH)] = false;
            }
        }
    }
    for row in g.iter_mut() {
        if row.iter().all(|&x| x) {
            row[rng.gen_range(0..WIDTH)] = false;
        }
    }
    board_of(&g)
}

/// Ten states in a line; action 0 tries to move right, action 1 left, each
/// succeeding with probability 0.8. Landing in state `s` pays a Bernoulli
/// reward with mean `(s + 1) / 10`. State 9 ends the episode.
pub struct ChainMdp;

pub const CHAIN_STATES: usize = 10;
pub const CHAIN_MOVE_P: f64 = 0.8;

impl ChainMdp {
    pub fn reward_mean(s: usize) -> f64 {
        (s + 1) as f64 / 10.0
    }

    fn targets(s: usize, a: u8) -> (usize, usize) {
        let moved = if a == 0 { (s + 1).min(CHAIN_STATES - 1) } else { s.saturating_sub(1) };
        (moved, s)
    }

    /// Exact expected T-step discounted return of taking `a` in `s` and then
    /// following the uniform random policy.
    pub fn exact_q(s: usize, a: u8, horizon: usize, gamma: f64) -> f64 {
        let v = |s: usize, steps: usize| Self::exact_v(s, steps, gamma);
        let (moved, stay) = Self::targets(s, a);
        let next_value = |t: usize| {
            Self::reward_mean(t) + if t == CHAIN_STATES - 1 { 0.0 } else { gamma * v(t, horizon - 1) }
        };
        CHAIN_MOVE_P * next_value(moved) + (1.0 - CHAIN_MOVE_P) * next_value(stay)
    }

    fn exact_v(s: usize, steps: usize, gamma: f64) -> f64 {
        if steps == 0 || s == CHAIN_STATES - 1 {
            return 0.0;
        }
        0.5 * (Self::exact_q(s, 0, steps, gamma) + Self::exact_q(s, 1, steps, gamma))
    }
}

impl Environment for ChainMdp {
    type State = usize;
    type Action = u8;
    type Error = Infallible;

    fn initial_state(&self, _: &mut dyn RngCore) -> usize {
        0
    }

    fn legal_actions(&self, s: &usize) -> Vec<u8> {
        if *s == CHAIN_STATES - 1 {
            vec![]
        } else {
            vec![0, 1]
        }
    }

    fn step(&self, s: &usize, a: u8, rng: &mut dyn RngCore, meter: &mut CallMeter) -> Result<Transition<usize>, Infallible> {
        meter.charge();
        let (moved, stay) = Self::targets(*s, a);
        let next = if rng.gen_bool(CHAIN_MOVE_P) { moved } else { stay };
        let reward = rng.gen_bool(Self::reward_mean(next)) as u8 as f64;
        Ok(Transition {
            next,
            reward,
            terminal: next == CHAIN_STATES - 1,
        })
    }
}

/// Uniform random policy.
pub struct UniformPolicy;

impl<E: Environment> Policy<E> for UniformPolicy {
    fn choose(&self, _: &E, _: &E::State, actions: &[E::Action], rng: &mut dyn RngCore) -> usize {
        rng.gen_range(0..actions.len())
    }
}

/// One never-ending state with two actions: action 1 pays 1 and differs from
/// action 0 by `TOY_SIGNS` in feature space, action 0 pays nothing.
pub struct SignalToy;

pub const TOY_SIGNS: [f64; NUM_FEATURES] = [1.0, -1.0, 1.0, 1.0, -1.0, 1.0, -1.0, -1.0];

impl Environment for SignalToy {
    type State = ();
    type Action = u8;
    type Error = Infallible;

    fn initial_state(&self, _: &mut dyn RngCore) {}

    fn legal_actions(&self, _: &()) -> Vec<u8> {
        vec![0, 1]
    }

    fn step(&self, _: &(), a: u8, _: &mut dyn RngCore, meter: &mut CallMeter) -> Result<Transition<()>, Infallible> {
        meter.charge();
        Ok(Transition {
            next: (),
            reward: a as f64,
            terminal: false,
        })
    }
}

impl FeatureEnvironment for SignalToy {
    fn candidates(&self, _: &(), actions: &[u8]) -> Vec<Candidate> {
        actions
            .iter()
            .map(|&a| Candidate {
                features: FeatureVector(TOY_SIGNS.map(|s| s * a as f64)),
                immediate_reward: a as f64,
            })
            .collect()
    }
}

/// Choice sets whose choices follow a conditional logit with `beta`.
pub fn logit_choice_data(rng: &mut impl Rng, beta: &[f64], sets: usize, max_alternatives: usize) -> Vec<ChoiceSet> {
    let p = beta.len();
    (0..sets)
        .map(|_| {
            let k = rng.gen_range(2..=max_alternatives);
            let rows: Vec<Vec<f64>> = (0..k).map(|_| (0..p).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
            let utils: Vec<f64> = rows.iter().map(|r| r.iter().zip(beta).map(|(x, b)| x * b).sum()).collect();
            let max = utils.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let weights: Vec<f64> = utils.iter().map(|u| (u - max).exp()).collect();
            let total: f64 = weights.iter().sum();
            let mut draw = rng.gen_range(0.0..total);
            let mut chosen = k - 1;
            for (i, w) in weights.iter().enumerate() {
                if draw < *w {
                    chosen = i;
                    break;
                }
                draw -= w;
            }
            ChoiceSet::from_rows(chosen, &rows).unwrap()
        })
        .collect()
}
