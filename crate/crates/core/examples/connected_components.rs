//! 4-connected labeling and the size sieve used to clean change masks.
//!
//!     cargo run --example connected_components

use conflict_watch::labeling::{label_components, sieve};

const MASK: [&str; 6] = [
    "##....#.",
    "##...##.",
    "......#.",
    ".#.#....",
    "..#..###",
    ".....###",
];

fn main() {
    let (w, h) = (MASK[0].len(), MASK.len());
    let mask: Vec<bool> = MASK.iter().flat_map(|r| r.chars().map(|c| c == '#')).collect();

    let comps = label_components(&mask, w, h);
    println!("{} components, sizes {:?}", comps.sizes.len(), comps.sizes);
    for row in comps.labels.chunks(w) {
        let line: String = row.iter().map(|&l| if l == 0 { '.' } else { char::from_digit(l, 36).unwrap_or('?') }).collect();
        println!("  {line}");
    }

    // Diagonal neighbours are separate components, so the three single pixels go.
    let kept = sieve(&mask, w, h, 4);
    println!("after removing components under 4 px:");
    for row in kept.chunks(w) {
        println!("  {}", row.iter().map(|&b| if b { '#' } else { '.' }).collect::<String>());
    }
}
