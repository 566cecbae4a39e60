//! 10x10 Tetris as an MDP: the state is the board plus the current piece,
//! actions are hard-drop placements (rotation, column), and the reward is the
//! number of cleared lines.

mod debug_format;
mod piece;

use std::fmt;

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::env::{CallMeter, Candidate, Environment, FeatureEnvironment, Transition};
use crate::features::{self, FeatureVector};

pub use debug_format::{format_board, parse_board, ParsedBoard};
pub use piece::{Piece, Shape};

pub const WIDTH: usize = 10;
pub const HEIGHT: usize = 10;
pub const FULL_ROW: u16 = (1 << WIDTH) - 1;

/// Upper bound on the number of placements of any piece on an empty board.
pub const MAX_ACTIONS: usize = 34;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TetrisError {
    #[error("piece {piece} has no rotation {rotation}")]
    BadRotation { piece: Piece, rotation: u8 },
    #[error("rotation {rotation} of piece {piece} does not fit at column {column}")]
    BadColumn { piece: Piece, rotation: u8, column: u8 },
    #[error("placement of {piece} (rotation {rotation}, column {column}) overflows the board")]
    Overflow { piece: Piece, rotation: u8, column: u8 },
    #[error("unknown piece {0:?}")]
    UnknownPiece(String),
    #[error("board parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("inconsistent placement event: {0}")]
    InconsistentEvent(String),
}

/// Occupancy grid, one bitmask per row, row 0 at the bottom, bit `c` = column `c`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Board {
    rows: [u16; HEIGHT],
}

impl Board {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a board from raw row masks. Bits beyond the width are dropped.
    /// Full rows are kept as given; callers that need the MDP invariant should
    /// check [`Board::has_full_row`].
    pub fn from_rows(rows: [u16; HEIGHT]) -> Self {
        Self {
            rows: rows.map(|r| r & FULL_ROW),
        }
    }

    pub fn rows(&self) -> &[u16; HEIGHT] {
        &self.rows
    }

    #[inline]
    pub fn row(&self, r: usize) -> u16 {
        self.rows[r]
    }

    #[inline]
    pub fn is_occupied(&self, row: usize, col: usize) -> bool {
        self.rows[row] >> col & 1 == 1
    }

    pub fn set(&mut self, row: usize, col: usize, occupied: bool) {
        if occupied {
            self.rows[row] |= 1 << col;
        } else {
            self.rows[row] &= !(1 << col);
        }
    }

    pub fn occupied_count(&self) -> u32 {
        self.rows.iter().map(|r| r.count_ones()).sum()
    }

    pub fn has_full_row(&self) -> bool {
        self.rows.contains(&FULL_ROW)
    }

    /// Height of each column: one above its highest occupied cell, 0 if empty.
    pub fn column_heights(&self) -> [u8; WIDTH] {
        let mut heights = [0u8; WIDTH];
        let mut seen = 0u16;
        for r in (0..HEIGHT).rev() {
            let new = self.rows[r] & !seen;
            if new != 0 {
                let mut bits = new;
                while bits != 0 {
                    let c = bits.trailing_zeros() as usize;
                    heights[c] = r as u8 + 1;
                    bits &= bits - 1;
                }
                seen |= new;
                if seen == FULL_ROW {
                    break;
                }
            }
        }
        heights
    }

    /// Left-right mirror image.
    pub fn mirrored(&self) -> Board {
        let mut rows = self.rows;
        for row in rows.iter_mut() {
            *row = row.reverse_bits() >> (16 - WIDTH);
        }
        Board { rows }
    }

    /// Removes full rows, shifting the rows above down. Returns the number
    /// removed and a bitmask of which original rows were cleared.
    fn clear_full_rows(&mut self) -> (u8, u16) {
        let mut cleared = 0u16;
        let mut write = 0;
        for read in 0..HEIGHT {
            if self.rows[read] == FULL_ROW {
                cleared |= 1 << read;
            } else {
                self.rows[write] = self.rows[read];
                write += 1;
            }
        }
        for r in write..HEIGHT {
            self.rows[r] = 0;
        }
        (cleared.count_ones() as u8, cleared)
    }
}

impl fmt::Debug for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f)?;
        f.write_str(&format_board(self, None))
    }
}

/// The MDP state: board and the piece about to be placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoardState {
    pub board: Board,
    pub piece: Piece,
}

impl BoardState {
    pub fn new(board: Board, piece: Piece) -> Self {
        Self { board, piece }
    }
}

/// A hard-drop placement: rotation index into [`Piece::rotations`] and the
/// leftmost column the rotated piece occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionPlacement {
    pub rotation: u8,
    pub column: u8,
}

impl ActionPlacement {
    pub fn new(rotation: u8, column: u8) -> Self {
        Self { rotation, column }
    }
}

/// What happened when a piece landed, before line clears shifted anything.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlacementEvent {
    /// (row, column) of the four piece cells, pre-clear coordinates.
    pub cells: [(u8, u8); 4],
    pub lines_cleared: u8,
    pub piece_cells_in_cleared_lines: u8,
}

impl PlacementEvent {
    /// An event for the "no placement" case, used to compute pure-board features.
    pub fn none() -> Self {
        Self {
            cells: [(0, 0); 4],
            lines_cleared: 0,
            piece_cells_in_cleared_lines: 0,
        }
    }
}

/// Deterministic result of dropping a piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    /// Post-clear board.
    pub board: Board,
    pub event: PlacementEvent,
}

/// Drops `piece` with the given placement onto `board`.
pub fn place(board: &Board, piece: Piece, action: ActionPlacement) -> Result<Placement, TetrisError> {
    place_with_heights(board, &board.column_heights(), piece, action)
}

fn place_with_heights(
    board: &Board,
    heights: &[u8; WIDTH],
    piece: Piece,
    action: ActionPlacement,
) -> Result<Placement, TetrisError> {
    let ActionPlacement { rotation, column } = action;
    let shape = piece
        .rotations()
        .get(rotation as usize)
        .ok_or(TetrisError::BadRotation { piece, rotation })?;
    if column as usize + shape.width as usize > WIDTH {
        return Err(TetrisError::BadColumn {
            piece,
            rotation,
            column,
        });
    }
    let rest = resting_row(heights, shape, column as usize);
    if rest + shape.height as usize > HEIGHT {
        return Err(TetrisError::Overflow {
            piece,
            rotation,
            column,
        });
    }

    let mut next = *board;
    for (dy, &mask) in shape.row_masks[..shape.height as usize].iter().enumerate() {
        next.rows[rest + dy] |= mask << column;
    }
    let mut cells = [(0u8, 0u8); 4];
    for (slot, &(dc, dr)) in cells.iter_mut().zip(shape.cells.iter()) {
        *slot = (rest as u8 + dr, column + dc);
    }
    let (lines_cleared, cleared_mask) = next.clear_full_rows();
    let piece_cells_in_cleared_lines = cells
        .iter()
        .filter(|&&(r, _)| cleared_mask >> r & 1 == 1)
        .count() as u8;

    Ok(Placement {
        board: next,
        event: PlacementEvent {
            cells,
            lines_cleared,
            piece_cells_in_cleared_lines,
        },
    })
}

#[inline]
fn resting_row(heights: &[u8; WIDTH], shape: &Shape, column: usize) -> usize {
    let mut rest = 0i32;
    for dc in 0..shape.width as usize {
        let r = heights[column + dc] as i32 - shape.bottom[dc] as i32;
        rest = rest.max(r);
    }
    rest as usize
}

/// All placements of `piece` that rest entirely inside the board.
pub fn legal_placements(board: &Board, piece: Piece) -> Vec<ActionPlacement> {
    let heights = board.column_heights();
    let mut actions = Vec::with_capacity(MAX_ACTIONS);
    for (rotation, shape) in piece.rotations().iter().enumerate() {
        for column in 0..=(WIDTH - shape.width as usize) {
            if resting_row(&heights, shape, column) + shape.height as usize <= HEIGHT {
                actions.push(ActionPlacement::new(rotation as u8, column as u8));
            }
        }
    }
    actions
}

/// Result of one metered Tetris transition.
#[derive(Debug, Clone, Copy)]
pub struct TetrisStep {
    pub next: BoardState,
    pub reward: u32,
    pub event: PlacementEvent,
    pub terminal: bool,
}

/// The Tetris generative model. Stateless; pieces are drawn i.i.d. uniformly.
#[derive(Debug, Clone, Copy, Default)]
pub struct Tetris;

impl Tetris {
    pub fn new() -> Self {
        Self
    }

    pub fn random_piece(rng: &mut dyn RngCore) -> Piece {
        Piece::ALL[rng.gen_range(0..Piece::ALL.len())]
    }

    /// Full transition including the placement event.
    pub fn transition(
        &self,
        state: &BoardState,
        action: ActionPlacement,
        rng: &mut dyn RngCore,
        meter: &mut CallMeter,
    ) -> Result<TetrisStep, TetrisError> {
        let placement = place(&state.board, state.piece, action)?;
        meter.charge();
        let next = BoardState::new(placement.board, Self::random_piece(rng));
        let terminal = legal_placements(&next.board, next.piece).is_empty();
        Ok(TetrisStep {
            next,
            reward: placement.event.lines_cleared as u32,
            event: placement.event,
            terminal,
        })
    }
}

impl Environment for Tetris {
    type State = BoardState;
    type Action = ActionPlacement;
    type Error = TetrisError;

    fn initial_state(&self, rng: &mut dyn RngCore) -> BoardState {
        BoardState::new(Board::empty(), Self::random_piece(rng))
    }

    fn legal_actions(&self, state: &BoardState) -> Vec<ActionPlacement> {
        legal_placements(&state.board, state.piece)
    }

    fn step(
        &self,
        state: &BoardState,
        action: ActionPlacement,
        rng: &mut dyn RngCore,
        meter: &mut CallMeter,
    ) -> Result<Transition<BoardState>, TetrisError> {
        let step = self.transition(state, action, rng, meter)?;
        Ok(Transition {
            next: step.next,
            reward: step.reward as f64,
            terminal: step.terminal,
        })
    }
}

impl FeatureEnvironment for Tetris {
    fn candidates(&self, state: &BoardState, actions: &[ActionPlacement]) -> Vec<Candidate> {
        let heights = state.board.column_heights();
        actions
            .iter()
            .map(|&a| {
                let p = place_with_heights(&state.board, &heights, state.piece, a)
                    .expect("candidate actions must be legal");
                Candidate {
                    features: features::placement_features(&p.event, &p.board),
                    immediate_reward: p.event.lines_cleared as f64,
                }
            })
            .collect()
    }
}

/// Features for a single placement; convenience for the CLI and tests.
pub fn placement_feature_vector(
    state: &BoardState,
    action: ActionPlacement,
) -> Result<FeatureVector, TetrisError> {
    let p = place(&state.board, state.piece, action)?;
    features::compute_features(&state.board, &p.event, &p.board)
}
