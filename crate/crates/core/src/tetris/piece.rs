use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use super::TetrisError;

/// The seven tetrominoes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Piece {
    I,
    O,
    T,
    S,
    Z,
    L,
    J,
}

impl Piece {
    pub const ALL: [Piece; 7] = [
        Piece::I,
        Piece::O,
        Piece::T,
        Piece::S,
        Piece::Z,
        Piece::L,
        Piece::J,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Piece> {
        Self::ALL.get(i).copied()
    }

    pub fn as_char(self) -> char {
        match self {
            Piece::I => 'I',
            Piece::O => 'O',
            Piece::T => 'T',
            Piece::S => 'S',
            Piece::Z => 'Z',
            Piece::L => 'L',
            Piece::J => 'J',
        }
    }

    /// Distinct orientations of this piece.
    pub fn rotations(self) -> &'static [Shape] {
        &shape_table()[self.index()]
    }

    /// Base orientation as (column, row) offsets, row 0 at the bottom.
    fn base_cells(self) -> [(u8, u8); 4] {
        match self {
            Piece::I => [(0, 0), (1, 0), (2, 0), (3, 0)],
            Piece::O => [(0, 0), (1, 0), (0, 1), (1, 1)],
            Piece::T => [(0, 0), (1, 0), (2, 0), (1, 1)],
            Piece::S => [(0, 0), (1, 0), (1, 1), (2, 1)],
            Piece::Z => [(1, 0), (2, 0), (0, 1), (1, 1)],
            Piece::L => [(0, 0), (1, 0), (2, 0), (2, 1)],
            Piece::J => [(0, 0), (1, 0), (2, 0), (0, 1)],
        }
    }
}

impl fmt::Display for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl FromStr for Piece {
    type Err = TetrisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" => Ok(Piece::I),
            "O" => Ok(Piece::O),
            "T" => Ok(Piece::T),
            "S" => Ok(Piece::S),
            "Z" => Ok(Piece::Z),
            "L" => Ok(Piece::L),
            "J" => Ok(Piece::J),
            other => Err(TetrisError::UnknownPiece(other.to_string())),
        }
    }
}

/// One orientation of a piece, normalized so the lowest row and leftmost
/// column are both 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shape {
    /// (column, row) offsets, sorted.
    pub cells: [(u8, u8); 4],
    pub width: u8,
    pub height: u8,
    /// Per column offset: lowest occupied row offset.
    pub bottom: [u8; 4],
    /// Per row offset: column bitmask of occupied offsets.
    pub row_masks: [u16; 4],
}

impl Shape {
    fn from_cells(mut cells: [(u8, u8); 4]) -> Shape {
        let min_c = cells.iter().map(|c| c.0).min().unwrap();
        let min_r = cells.iter().map(|c| c.1).min().unwrap();
        for c in cells.iter_mut() {
            c.0 -= min_c;
            c.1 -= min_r;
        }
        cells.sort_unstable();
        let width = cells.iter().map(|c| c.0).max().unwrap() + 1;
        let height = cells.iter().map(|c| c.1).max().unwrap() + 1;
        let mut bottom = [u8::MAX; 4];
        let mut row_masks = [0u16; 4];
        for &(c, r) in &cells {
            bottom[c as usize] = bottom[c as usize].min(r);
            row_masks[r as usize] |= 1 << c;
        }
        Shape {
            cells,
            width,
            height,
            bottom,
            row_masks,
        }
    }

    /// Quarter turn counter-clockwise: (c, r) -> (-r, c).
    fn rotated(&self) -> Shape {
        let max_r = self.height - 1;
        let mut cells = self.cells;
        for cell in cells.iter_mut() {
            *cell = (max_r - cell.1, cell.0);
        }
        Shape::from_cells(cells)
    }
}

fn shape_table() -> &'static [Vec<Shape>; 7] {
    static TABLE: OnceLock<[Vec<Shape>; 7]> = OnceLock::new();
    TABLE.get_or_init(|| {
        Piece::ALL.map(|piece| {
            let mut shapes: Vec<Shape> = Vec::with_capacity(4);
            let mut shape = Shape::from_cells(piece.base_cells());
            for _ in 0..4 {
                if !shapes.contains(&shape) {
                    shapes.push(shape.clone());
                }
                shape = shape.rotated();
            }
            shapes
        })
    })
}
