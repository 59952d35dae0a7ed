use super::{squared_l2, FusionError, Vector};

/// Number of keyframes averaged into a video query.
pub const KEYFRAME_COUNT: usize = 4;

/// Picks `n` strictly increasing frame indices by a greedy motion-energy
/// heuristic.
///
/// Frame 0 is always taken. Each following pick is the later frame farthest
/// (L2) from the previous pick, restricted so enough frames remain for the
/// rest of the picks. Ties go to the smaller index.
pub fn select_keyframes(frames: &[Vector], n: usize) -> Result<Vec<usize>, FusionError> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if frames.len() < n {
        return Err(FusionError::TooFewFrames {
            needed: n,
            got: frames.len(),
        });
    }
    let dim = frames[0].dim();
    if let Some(bad) = frames.iter().find(|f| f.dim() != dim) {
        return Err(FusionError::DimMismatch {
            expected: dim,
            got: bad.dim(),
        });
    }
    let mut picked = Vec::with_capacity(n);
    picked.push(0usize);
    while picked.len() < n {
        let prev = *picked.last().expect("non-empty");
        let remaining_after = n - picked.len() - 1;
        let last_allowed = frames.len() - 1 - remaining_after;
        let mut best = prev + 1;
        let mut best_dist = f64::NEG_INFINITY;
        for j in prev + 1..=last_allowed {
            let d = squared_l2(frames[prev].as_slice(), frames[j].as_slice());
            if d > best_dist {
                best = j;
                best_dist = d;
            }
        }
        picked.push(best);
    }
    Ok(picked)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(xs: &[f32]) -> Vector {
        Vector::new(xs.to_vec()).unwrap()
    }

    #[test]
    fn forced_selection() {
        let frames: Vec<_> = (0..4).map(|i| frame(&[i as f32, 1.0])).collect();
        assert_eq!(select_keyframes(&frames, 4).unwrap(), [0, 1, 2, 3]);
    }

    #[test]
    fn identical_frames_tie_break_by_index() {
        let frames = vec![frame(&[0.5, 0.5]); 8];
        assert_eq!(select_keyframes(&frames, 4).unwrap(), [0, 1, 2, 3]);
    }

    #[test]
    fn too_few_frames() {
        let frames = vec![frame(&[1.0]); 3];
        assert_eq!(
            select_keyframes(&frames, 4),
            Err(FusionError::TooFewFrames { needed: 4, got: 3 })
        );
    }

    fn dist(a: &Vector, b: &Vector) -> f64 {
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(x, y)| ((x - y) as f64).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn summed_path(frames: &[Vector], idx: &[usize]) -> f64 {
        idx.windows(2).map(|w| dist(&frames[w[0]], &frames[w[1]])).sum()
    }

    #[test]
    fn two_jumps_reach_the_exhaustive_optimum() {
        // Scene A for frames 0..3, scene B for 3..7, scene C for 7..10.
        let frames: Vec<_> = (0..10)
            .map(|i| match i {
                0..=2 => frame(&[0.0, 0.0, 0.0]),
                3..=6 => frame(&[5.0, 0.0, 0.0]),
                _ => frame(&[2.0, 3.0, 0.0]),
            })
            .collect();
        let greedy = select_keyframes(&frames, 4).unwrap();

        let mut best = f64::NEG_INFINITY;
        for a in 1..10 {
            for b in a + 1..10 {
                for c in b + 1..10 {
                    best = best.max(summed_path(&frames, &[0, a, b, c]));
                }
            }
        }
        assert_eq!(greedy, [0, 3, 7, 8]);
        assert!((summed_path(&frames, &greedy) - best).abs() < 1e-9);
    }

    #[test]
    fn selection_is_strictly_increasing_and_stable_under_tail_permutation() {
        // Frames after the last pick that every step compared against can be
        // reordered freely. Frames beyond the first step's feasibility window
        // are left in place.
        use rand::{seq::SliceRandom, Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let len = rng.gen_range(4..20);
            let frames: Vec<_> = (0..len)
                .map(|_| frame(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]))
                .collect();
            let sel = select_keyframes(&frames, 4).unwrap();
            assert!(sel.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(select_keyframes(&frames, 4).unwrap(), sel);

            let last = *sel.last().unwrap();
            let always_in_window = len - 4 + 1;
            if last + 1 < always_in_window {
                let mut shuffled = frames.clone();
                shuffled[last + 1..=always_in_window].shuffle(&mut rng);
                assert_eq!(select_keyframes(&shuffled, 4).unwrap(), sel);
            }
        }
    }
}
