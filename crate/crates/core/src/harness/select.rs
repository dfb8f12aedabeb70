/// Greedy set cover over a `[test][mutant]` kill matrix.
///
/// Repeatedly picks the test that kills the most mutants not yet killed and
/// stops once no test adds coverage. Ties go to the test that comes first in
/// `tie_order` (a permutation of test indices; lowest index when `None`).
/// Returns test indices in selection order.
pub fn select_minimal_tests(cells: &[Vec<bool>], tie_order: Option<&[usize]>) -> Vec<usize> {
    let identity: Vec<usize>;
    let order = match tie_order {
        Some(o) => o,
        None => {
            identity = (0..cells.len()).collect();
            &identity
        }
    };
    let width = cells.first().map_or(0, Vec::len);
    let mut covered = vec![false; width];
    let mut selected = Vec::new();
    let mut used = vec![false; cells.len()];
    loop {
        let mut best: Option<(usize, usize)> = None;
        for &t in order {
            if used[t] {
                continue;
            }
            let gain = cells[t].iter().zip(&covered).filter(|(k, c)| **k && !**c).count();
            if gain > 0 && best.is_none_or(|(_, g)| gain > g) {
                best = Some((t, gain));
            }
        }
        let Some((t, _)) = best else { break };
        used[t] = true;
        selected.push(t);
        for (c, &k) in covered.iter_mut().zip(&cells[t]) {
            *c |= k;
        }
    }
    selected
}

/// `killed / killable`, or `None` when nothing is killable.
pub fn mutation_score(killed: usize, killable: usize) -> Option<f64> {
    debug_assert!(killed <= killable, "killed {killed} exceeds killable {killable}");
    (killable > 0).then(|| killed as f64 / killable as f64)
}
