//! Exact hypervolume computations on worked 2-D and 3-D fronts, all
//! objectives minimized.
//!
//! Run with: `cargo run --example hypervolume`

use carbondse::optimize::hypervolume_points;

fn main() {
    // Three-point staircase against (4,4): slabs of area 1 + 2 + 3.
    let front = vec![vec![1.0, 3.0], vec![2.0, 2.0], vec![3.0, 1.0]];
    println!(
        "2-D staircase vs (4,4): {}",
        hypervolume_points(&front, &[4.0, 4.0]).unwrap()
    );

    // Dominated and duplicate points contribute nothing.
    let mut padded = front.clone();
    padded.push(vec![3.0, 3.0]);
    padded.push(vec![2.0, 2.0]);
    println!(
        "with dominated point:   {}",
        hypervolume_points(&padded, &[4.0, 4.0]).unwrap()
    );

    // A 3-D front via recursive slicing on the last objective.
    let front3 = vec![
        vec![0.1, 0.7, 0.6],
        vec![0.3, 0.5, 0.4],
        vec![0.5, 0.3, 0.5],
        vec![0.7, 0.2, 0.2],
    ];
    println!(
        "3-D front vs (1,1,1):   {:.6}",
        hypervolume_points(&front3, &[1.0; 3]).unwrap()
    );

    // Members must strictly dominate the reference point.
    let err = hypervolume_points(&[vec![1.0, 5.0]], &[4.0, 4.0]).unwrap_err();
    println!("non-dominating member:  {err}");
}
