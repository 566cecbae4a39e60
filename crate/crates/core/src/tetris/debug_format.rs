//! Plain-text board fixtures: `HEIGHT` lines top-to-bottom of `.`/`#`,
//! optionally followed by `piece: <P>`.

use super::{Board, Piece, TetrisError, HEIGHT, WIDTH};

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedBoard {
    pub board: Board,
    pub piece: Option<Piece>,
}

pub fn parse_board(text: &str) -> Result<ParsedBoard, TetrisError> {
    let mut grid_lines = Vec::with_capacity(HEIGHT);
    let mut piece = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("piece:") {
            piece = Some(rest.trim().parse::<Piece>().map_err(|e| TetrisError::Parse {
                line: i + 1,
                message: e.to_string(),
            })?);
            continue;
        }
        if piece.is_some() {
            return Err(TetrisError::Parse {
                line: i + 1,
                message: "board rows after the piece line".into(),
            });
        }
        grid_lines.push((i + 1, line));
    }
    if grid_lines.len() != HEIGHT {
        return Err(TetrisError::Parse {
            line: grid_lines.last().map_or(0, |l| l.0),
            message: format!("expected {HEIGHT} board rows, found {}", grid_lines.len()),
        });
    }
    let mut rows = [0u16; HEIGHT];
    for (top_index, (line_no, line)) in grid_lines.into_iter().enumerate() {
        if line.chars().count() != WIDTH {
            return Err(TetrisError::Parse {
                line: line_no,
                message: format!("expected {WIDTH} cells"),
            });
        }
        let r = HEIGHT - 1 - top_index;
        for (c, ch) in line.chars().enumerate() {
            match ch {
                '#' => rows[r] |= 1 << c,
                '.' => {}
                other => {
                    return Err(TetrisError::Parse {
                        line: line_no,
                        message: format!("unexpected character {other:?}"),
                    })
                }
            }
        }
    }
    Ok(ParsedBoard {
        board: Board::from_rows(rows),
        piece,
    })
}

pub fn format_board(board: &Board, piece: Option<Piece>) -> String {
    let mut out = String::with_capacity((WIDTH + 1) * (HEIGHT + 1));
    for r in (0..HEIGHT).rev() {
        for c in 0..WIDTH {
            out.push(if board.is_occupied(r, c) { '#' } else { '.' });
        }
        out.push('\n');
    }
    if let Some(p) = piece {
        out.push_str(&format!("piece: {p}\n"));
    }
    out
}
