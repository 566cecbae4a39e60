//! The eight Dellacherie/BCTS placement features.
//!
//! Rows are indexed from the bottom. Everything except `landing_height` and
//! `eroded_piece_cells` is measured on the post-clear board, with these
//! conventions: side walls count as occupied for row transitions; the floor
//! counts as occupied and the space above the top row as empty for column
//! transitions; a well cell is empty, flanked by occupied cells or walls, and
//! open to the sky, and each vertical run of `k` well cells adds `1 + ... + k`.

use std::fmt;
use std::ops::Index;

use crate::tetris::{Board, PlacementEvent, TetrisError, FULL_ROW, HEIGHT, WIDTH};

pub const NUM_FEATURES: usize = 8;

pub const FEATURE_NAMES: [&str; NUM_FEATURES] = [
    "landing_height",
    "eroded_piece_cells",
    "row_transitions",
    "column_transitions",
    "holes",
    "board_wells",
    "hole_depth",
    "rows_with_holes",
];

/// Feature directions of the published BCTS weights: only eroded piece cells
/// is rewarded.
pub const BCTS_DIRECTIONS: [f64; NUM_FEATURES] = [-1.0, 1.0, -1.0, -1.0, -1.0, -1.0, -1.0, -1.0];

/// Index of `rows_with_holes`, the normalizer for reported weights.
pub const ROWS_WITH_HOLES: usize = 7;

/// phi(s, a) in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeatureVector(pub [f64; NUM_FEATURES]);

impl FeatureVector {
    pub fn as_array(&self) -> &[f64; NUM_FEATURES] {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, weights: &[f64]) -> f64 {
        debug_assert_eq!(weights.len(), NUM_FEATURES);
        self.0.iter().zip(weights).map(|(f, w)| f * w).sum()
    }

    pub fn landing_height(&self) -> f64 {
        self.0[0]
    }
    pub fn eroded_piece_cells(&self) -> f64 {
        self.0[1]
    }
    pub fn row_transitions(&self) -> f64 {
        self.0[2]
    }
    pub fn column_transitions(&self) -> f64 {
        self.0[3]
    }
    pub fn holes(&self) -> f64 {
        self.0[4]
    }
    pub fn board_wells(&self) -> f64 {
        self.0[5]
    }
    pub fn hole_depth(&self) -> f64 {
        self.0[6]
    }
    pub fn rows_with_holes(&self) -> f64 {
        self.0[7]
    }
}

impl Index<usize> for FeatureVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Display for FeatureVector {
    /// Comma-separated, canonical order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Board-only features, i.e. everything except the two placement quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BoardFeatures {
    pub row_transitions: u32,
    pub column_transitions: u32,
    pub holes: u32,
    pub board_wells: u32,
    pub hole_depth: u32,
    pub rows_with_holes: u32,
}

/// Checks that `(pre, event, post)` describe one placement and computes the
/// features.
pub fn compute_features(
    pre: &Board,
    event: &PlacementEvent,
    post: &Board,
) -> Result<FeatureVector, TetrisError> {
    let mut piece_mask = [0u16; HEIGHT];
    for &(r, c) in &event.cells {
        if r as usize >= HEIGHT || c as usize >= WIDTH {
            return Err(TetrisError::InconsistentEvent(format!(
                "piece cell ({r}, {c}) outside the board"
            )));
        }
        if pre.is_occupied(r as usize, c as usize) || piece_mask[r as usize] >> c & 1 == 1 {
            return Err(TetrisError::InconsistentEvent(format!(
                "piece cell ({r}, {c}) overlaps"
            )));
        }
        piece_mask[r as usize] |= 1 << c;
    }
    let full_rows = (0..HEIGHT)
        .filter(|&r| pre.row(r) | piece_mask[r] == FULL_ROW)
        .count() as u8;
    if full_rows != event.lines_cleared {
        return Err(TetrisError::InconsistentEvent(format!(
            "event reports {} cleared lines, placement fills {full_rows}",
            event.lines_cleared
        )));
    }
    let expected = pre.occupied_count() + 4 - WIDTH as u32 * event.lines_cleared as u32;
    if post.occupied_count() != expected || post.has_full_row() {
        return Err(TetrisError::InconsistentEvent(
            "post-clear board does not match the placement".into(),
        ));
    }
    Ok(placement_features(event, post))
}

/// Features of a placement whose consistency is already known.
#[inline]
pub fn placement_features(event: &PlacementEvent, post: &Board) -> FeatureVector {
    let (lo, hi) = event
        .cells
        .iter()
        .fold((u8::MAX, 0u8), |(lo, hi), &(r, _)| (lo.min(r), hi.max(r)));
    let landing_height = (lo as f64 + hi as f64) / 2.0;
    let eroded = event.lines_cleared as f64 * event.piece_cells_in_cleared_lines as f64;
    let b = board_features(post);
    FeatureVector([
        landing_height,
        eroded,
        b.row_transitions as f64,
        b.column_transitions as f64,
        b.holes as f64,
        b.board_wells as f64,
        b.hole_depth as f64,
        b.rows_with_holes as f64,
    ])
}

/// Features of a board with no placement (landing height and erosion 0).
pub fn pure_board_features(board: &Board) -> FeatureVector {
    let b = board_features(board);
    FeatureVector([
        0.0,
        0.0,
        b.row_transitions as f64,
        b.column_transitions as f64,
        b.holes as f64,
        b.board_wells as f64,
        b.hole_depth as f64,
        b.rows_with_holes as f64,
    ])
}

/// Single top-down sweep over the rows.
pub fn board_features(board: &Board) -> BoardFeatures {
    const WALLED: u16 = 1 | 1 << (WIDTH + 1);
    const PAIRS: u16 = (1 << (WIDTH + 1)) - 1;

    let mut out = BoardFeatures::default();
    // occupied cells seen so far above the current row, per column
    let mut covered = 0u16;
    let mut above_count = [0u8; WIDTH];
    let mut well_run = [0u8; WIDTH];
    let mut prev_row = 0u16; // the empty space above the top row

    for r in (0..HEIGHT).rev() {
        let row = board.row(r);
        let walled = row << 1 | WALLED;
        out.row_transitions += ((walled ^ walled >> 1) & PAIRS).count_ones();
        out.column_transitions += (row ^ prev_row).count_ones();

        let holes = !row & covered & FULL_ROW;
        if holes != 0 {
            out.holes += holes.count_ones();
            out.rows_with_holes += 1;
            let mut bits = holes;
            while bits != 0 {
                let c = bits.trailing_zeros() as usize;
                out.hole_depth += above_count[c] as u32;
                bits &= bits - 1;
            }
        }

        // left neighbour of column c is bit c of `walled`, right is bit c + 2
        let flanked = walled & walled >> 2;
        let wells = !row & flanked & !covered & FULL_ROW;
        for (c, run) in well_run.iter_mut().enumerate() {
            if wells >> c & 1 == 1 {
                *run += 1;
                out.board_wells += *run as u32;
            } else {
                *run = 0;
            }
        }

        let mut bits = row;
        while bits != 0 {
            let c = bits.trailing_zeros() as usize;
            above_count[c] += 1;
            bits &= bits - 1;
        }
        covered |= row;
        prev_row = row;
    }
    // floor counts as occupied
    out.column_transitions += (prev_row ^ FULL_ROW).count_ones();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tetris::{place, ActionPlacement, Piece};

    #[test]
    fn empty_board() {
        let f = pure_board_features(&Board::empty());
        assert_eq!(f.0, [0.0, 0.0, 20.0, 10.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn o_piece_in_corner() {
        let pre = Board::empty();
        let p = place(&pre, Piece::O, ActionPlacement::new(0, 0)).unwrap();
        let f = compute_features(&pre, &p.event, &p.board).unwrap();
        // `|##........|` has two transitions with occupied walls, same as an
        // empty row, so row transitions stay at 10 * 2.
        assert_eq!(f.0, [0.5, 0.0, 20.0, 10.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn single_covered_cell() {
        let mut board = Board::empty();
        board.set(1, 0, true);
        let f = pure_board_features(&board);
        assert_eq!(f.holes(), 1.0);
        assert_eq!(f.rows_with_holes(), 1.0);
        assert_eq!(f.hole_depth(), 1.0);
    }

    #[test]
    fn wells_accumulate_by_depth() {
        // columns 0 and 2 filled to height 3, column 1 empty: a 3-deep well at
        // column 1; column 3 is flanked by column 2 (height 3) and column 4
        // (empty), so it is not a well.
        let mut board = Board::empty();
        for r in 0..3 {
            board.set(r, 0, true);
            board.set(r, 2, true);
        }
        assert_eq!(board_features(&board).board_wells, 1 + 2 + 3);
        // the wall counts as a neighbour: column 9 next to a height-2 column 8
        board.set(0, 8, true);
        board.set(1, 8, true);
        assert_eq!(board_features(&board).board_wells, 6 + 1 + 2);
    }

    #[test]
    fn hole_depth_counts_every_cell_above() {
        let mut board = Board::empty();
        board.set(2, 4, true);
        board.set(3, 4, true);
        // holes at rows 0 and 1 of column 4, each under 2 occupied cells
        let b = board_features(&board);
        assert_eq!(b.holes, 2);
        assert_eq!(b.hole_depth, 4);
        assert_eq!(b.rows_with_holes, 2);
    }

    #[test]
    fn erosion_uses_piece_cells_in_cleared_rows() {
        let mut rows = [0u16; HEIGHT];
        rows[0] = FULL_ROW & !0b11;
        rows[1] = FULL_ROW & !0b11;
        let pre = Board::from_rows(rows);
        let p = place(&pre, Piece::O, ActionPlacement::new(0, 0)).unwrap();
        assert_eq!(p.event.lines_cleared, 2);
        let f = compute_features(&pre, &p.event, &p.board).unwrap();
        assert_eq!(f.eroded_piece_cells(), 8.0);
        assert_eq!(f.landing_height(), 0.5);
        assert_eq!(f.row_transitions(), 20.0);
    }

    #[test]
    fn inconsistent_triples_are_rejected() {
        let pre = Board::empty();
        let p = place(&pre, Piece::O, ActionPlacement::new(0, 0)).unwrap();
        let mut bad = p.event;
        bad.lines_cleared = 1;
        assert!(compute_features(&pre, &bad, &p.board).is_err());
        assert!(compute_features(&pre, &p.event, &Board::empty()).is_err());
        let mut overlapping = Board::empty();
        overlapping.set(0, 0, true);
        assert!(compute_features(&overlapping, &p.event, &p.board).is_err());
    }
}
