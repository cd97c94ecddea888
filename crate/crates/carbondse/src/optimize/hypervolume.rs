//! Exact hypervolume of a front relative to a reference point, all
//! objectives minimized: a coordinate sweep in 2-D and recursive slicing
//! on the last objective for 3-D and 4-D fronts.

use crate::error::{Error, Result};

use super::ParetoFront;

fn check_dominates_ref(points: &[Vec<f64>], ref_point: &[f64]) -> Result<()> {
    for p in points {
        if p.len() != ref_point.len() {
            return Err(Error::BadObjectiveArity(p.len()));
        }
        if !p.iter().zip(ref_point).all(|(x, r)| x < r) {
            return Err(Error::RefPointNotDominated {
                member: format!("{p:?}"),
                reference: format!("{ref_point:?}"),
            });
        }
    }
    Ok(())
}

/// 2-D sweep: walk points by the first coordinate and stack slabs of the
/// best (lowest) second coordinate seen so far.
fn hv_2d(points: &mut [(f64, f64)], ref_point: (f64, f64)) -> f64 {
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut hv = 0.0;
    let mut best_y = f64::INFINITY;
    for i in 0..points.len() {
        let (x, y) = points[i];
        let next_x = points.get(i + 1).map(|p| p.0).unwrap_or(ref_point.0);
        best_y = best_y.min(y);
        hv += (next_x - x) * (ref_point.1 - best_y);
    }
    hv
}

fn hv_rec(points: &[Vec<f64>], ref_point: &[f64]) -> f64 {
    let d = ref_point.len();
    if points.is_empty() {
        return 0.0;
    }
    if d == 2 {
        let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
        return hv_2d(&mut pts, (ref_point[0], ref_point[1]));
    }
    // Slice on the last objective: the volume between consecutive slice
    // levels is the (d-1)-dimensional hypervolume of everything at or
    // below the lower level, times the slab thickness.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a][d - 1].total_cmp(&points[b][d - 1]));
    let mut levels: Vec<f64> = order.iter().map(|&i| points[i][d - 1]).collect();
    levels.dedup();
    levels.push(ref_point[d - 1]);
    let reduced_ref = &ref_point[..d - 1];
    let mut hv = 0.0;
    for w in levels.windows(2) {
        let (level, next) = (w[0], w[1]);
        let active: Vec<Vec<f64>> = points
            .iter()
            .filter(|p| p[d - 1] <= level)
            .map(|p| p[..d - 1].to_vec())
            .collect();
        hv += (next - level) * hv_rec(&active, reduced_ref);
    }
    hv
}

/// Exact dominated hypervolume of minimized points against a reference
/// point. Supports 2 to 4 objectives; every point must strictly dominate
/// the reference point.
pub fn hypervolume_points(points: &[Vec<f64>], ref_point: &[f64]) -> Result<f64> {
    if !(2..=4).contains(&ref_point.len()) {
        return Err(Error::BadObjectiveArity(ref_point.len()));
    }
    if points.is_empty() {
        return Ok(0.0);
    }
    check_dominates_ref(points, ref_point)?;
    Ok(hv_rec(points, ref_point))
}

/// Hypervolume of a front's objective vectors against a reference point.
pub fn hypervolume(front: &ParetoFront, ref_point: &[f64]) -> Result<f64> {
    let points: Vec<Vec<f64>> = front
        .members
        .iter()
        .filter_map(|c| c.objectives())
        .collect();
    hypervolume_points(&points, ref_point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn slab_decomposition_anchor() {
        // {(1,3),(2,2),(3,1)} against (4,4): slabs 1 + 2 + 3.
        let points = vec![vec![1.0, 3.0], vec![2.0, 2.0], vec![3.0, 1.0]];
        assert_eq!(hypervolume_points(&points, &[4.0, 4.0]).unwrap(), 6.0);
    }

    #[test]
    fn empty_front_has_zero_volume() {
        assert_eq!(hypervolume_points(&[], &[4.0, 4.0]).unwrap(), 0.0);
    }

    #[test]
    fn dominated_and_duplicate_points_add_nothing() {
        let front = vec![vec![1.0, 3.0], vec![2.0, 2.0], vec![3.0, 1.0]];
        let mut padded = front.clone();
        padded.push(vec![3.0, 3.0]);
        padded.push(vec![2.0, 2.0]);
        assert_eq!(
            hypervolume_points(&front, &[4.0, 4.0]).unwrap(),
            hypervolume_points(&padded, &[4.0, 4.0]).unwrap()
        );
    }

    #[test]
    fn member_not_dominating_reference_is_an_error() {
        let points = vec![vec![1.0, 5.0]];
        let err = hypervolume_points(&points, &[4.0, 4.0]).unwrap_err();
        assert!(err.to_string().contains("[1.0, 5.0]"));
    }

    #[test]
    fn arity_outside_two_to_four_is_rejected() {
        assert!(hypervolume_points(&[vec![1.0]], &[2.0]).is_err());
        assert!(hypervolume_points(&[vec![0.0; 5]], &[1.0; 5]).is_err());
    }

    #[test]
    fn single_3d_box() {
        let points = vec![vec![0.5, 0.5, 0.5]];
        let hv = hypervolume_points(&points, &[1.0, 1.0, 1.0]).unwrap();
        assert!((hv - 0.125).abs() < 1e-12);
    }

    fn monte_carlo(points: &[Vec<f64>], ref_point: &[f64], samples: usize, seed: u64) -> f64 {
        // The box spans [min per dim, ref]; count samples dominated by
        // some point.
        let d = ref_point.len();
        let lo: Vec<f64> = (0..d)
            .map(|i| points.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min))
            .collect();
        let volume: f64 = lo.iter().zip(ref_point).map(|(a, b)| b - a).product();
        let mut rng = StdRng::seed_from_u64(seed);
        let mut hits = 0usize;
        for _ in 0..samples {
            let x: Vec<f64> = (0..d).map(|i| rng.gen_range(lo[i]..ref_point[i])).collect();
            if points
                .iter()
                .any(|p| p.iter().zip(&x).all(|(pi, xi)| pi <= xi))
            {
                hits += 1;
            }
        }
        volume * hits as f64 / samples as f64
    }

    #[test]
    fn three_d_matches_monte_carlo_within_one_percent() {
        let points = vec![
            vec![0.1, 0.7, 0.6],
            vec![0.3, 0.5, 0.4],
            vec![0.5, 0.3, 0.5],
            vec![0.7, 0.2, 0.2],
            vec![0.2, 0.9, 0.3],
            vec![0.8, 0.1, 0.8],
        ];
        let reference = [1.0, 1.0, 1.0];
        let exact = hypervolume_points(&points, &reference).unwrap();
        let mc = monte_carlo(&points, &reference, 1_000_000, 99);
        assert!(
            (exact - mc).abs() / exact < 0.01,
            "exact {exact} vs mc {mc}"
        );
    }

    #[test]
    fn four_d_matches_monte_carlo_within_one_percent() {
        let points = vec![
            vec![0.2, 0.8, 0.4, 0.6],
            vec![0.6, 0.3, 0.7, 0.2],
            vec![0.4, 0.5, 0.2, 0.8],
            vec![0.8, 0.2, 0.5, 0.4],
        ];
        let reference = [1.0, 1.0, 1.0, 1.0];
        let exact = hypervolume_points(&points, &reference).unwrap();
        let mc = monte_carlo(&points, &reference, 1_000_000, 7);
        assert!(
            (exact - mc).abs() / exact < 0.01,
            "exact {exact} vs mc {mc}"
        );
    }

    #[test]
    fn translation_invariance_of_random_2d_fronts() {
        let mut rng = StdRng::seed_from_u64(53);
        for _ in 0..100 {
            let n = rng.gen_range(1..20);
            let points: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![rng.gen_range(0.0..0.9), rng.gen_range(0.0..0.9)])
                .collect();
            let hv = hypervolume_points(&points, &[1.0, 1.0]).unwrap();
            let shifted: Vec<Vec<f64>> = points
                .iter()
                .map(|p| vec![p[0] + 5.0, p[1] + 5.0])
                .collect();
            let hv2 = hypervolume_points(&shifted, &[6.0, 6.0]).unwrap();
            assert!((hv - hv2).abs() < 1e-9);
        }
    }
}
