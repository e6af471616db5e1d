//! Deterministic synthetic digit images, IDX-compatible.
//!
//! Each example renders a 5×7 digit glyph, upscaled 2x, at a slightly
//! jittered position with a jittered stroke intensity over low-amplitude
//! background noise. The noise keeps every pixel informative (no coordinate
//! is identically zero across a batch), the large mostly-centered glyphs
//! give early training the strong consistent gradient signal that real
//! handwritten-digit data shows, and the jitter keeps the task non-trivial
//! while staying easily learnable by a small fully-connected network.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::train::idx::IdxDataset;

/// 5×7 bitmap glyphs for the digits 0–9, one string per row.
const GLYPHS: [[&str; 7]; 10] = [
    ["01110", "10001", "10011", "10101", "11001", "10001", "01110"],
    ["00100", "01100", "00100", "00100", "00100", "00100", "01110"],
    ["01110", "10001", "00001", "00010", "00100", "01000", "11111"],
    ["11111", "00010", "00100", "00010", "00001", "10001", "01110"],
    ["00010", "00110", "01010", "10010", "11111", "00010", "00010"],
    ["11111", "10000", "11110", "00001", "00001", "10001", "01110"],
    ["00110", "01000", "10000", "11110", "10001", "10001", "01110"],
    ["11111", "00001", "00010", "00100", "01000", "01000", "01000"],
    ["01110", "10001", "10001", "01110", "10001", "10001", "01110"],
    ["01110", "10001", "10001", "01111", "00001", "00010", "01100"],
];

const SCALE: usize = 2;
const GLYPH_W: usize = 5 * SCALE;
const GLYPH_H: usize = 7 * SCALE;

/// Generates `n` synthetic digit examples on a `size × size` canvas.
pub fn synthetic_digits(n: usize, size: usize, seed: u64) -> Result<IdxDataset> {
    if n == 0 {
        return Err(Error::invalid("dataset size must be at least 1"));
    }
    if size < GLYPH_H {
        return Err(Error::invalid(format!(
            "canvas size must be at least {GLYPH_H}, got {size}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut images = Vec::with_capacity(n * size * size);
    let mut labels = Vec::with_capacity(n);

    let max_x = size - GLYPH_W;
    let max_y = size - GLYPH_H;
    for _ in 0..n {
        let digit = rng.random_range(0..10u8);
        let x0 = rng.random_range(0..=max_x);
        let y0 = rng.random_range(0..=max_y);
        let intensity: u8 = rng.random_range(170..=255);

        let start = images.len();
        for _ in 0..size * size {
            images.push(rng.random_range(0..=12u8));
        }
        let glyph = &GLYPHS[digit as usize];
        for (gy, row) in glyph.iter().enumerate() {
            for (gx, ch) in row.bytes().enumerate() {
                if ch == b'1' {
                    let wobble: u8 = rng.random_range(0..=25);
                    let value = intensity.saturating_sub(wobble);
                    for dy in 0..SCALE {
                        for dx in 0..SCALE {
                            let idx = start
                                + (y0 + gy * SCALE + dy) * size
                                + (x0 + gx * SCALE + dx);
                            images[idx] = images[idx].max(value);
                        }
                    }
                }
            }
        }
        labels.push(digit);
    }

    IdxDataset::from_parts(images, labels, size, size)
}
