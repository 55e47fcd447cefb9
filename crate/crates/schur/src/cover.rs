//! Exact covers of a small universe by library blocks, on bit masks.

/// All exact covers of `universe` by pairwise disjoint blocks drawn from
/// `blocks`: every solution is a list of block indices whose masks are
/// disjoint and union to exactly `universe`. Indices within a solution are
/// ascending and the solution list is sorted, so the output is canonical.
///
/// The search branches on the lowest uncovered bit, trying candidate blocks
/// in index order, so each cover is discovered exactly once.
pub fn exact_covers(universe: u64, blocks: &[u64]) -> Vec<Vec<usize>> {
    let usable: Vec<usize> = (0..blocks.len())
        .filter(|&i| blocks[i] != 0 && blocks[i] & !universe == 0)
        .collect();
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    search(universe, &usable, blocks, &mut chosen, &mut out);
    for solution in &mut out {
        solution.sort_unstable();
    }
    out.sort();
    out
}

fn search(
    remaining: u64,
    usable: &[usize],
    blocks: &[u64],
    chosen: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if remaining == 0 {
        out.push(chosen.clone());
        return;
    }
    let pivot = 1u64 << remaining.trailing_zeros();
    for &idx in usable {
        let block = blocks[idx];
        if block & pivot != 0 && block & !remaining == 0 {
            chosen.push(idx);
            search(remaining & !block, usable, blocks, chosen, out);
            chosen.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covers_of_a_four_point_universe() {
        let blocks = [0b0011, 0b1100, 0b0101, 0b1010, 0b1111];
        assert_eq!(
            exact_covers(0b1111, &blocks),
            vec![vec![0, 1], vec![2, 3], vec![4]]
        );
    }

    #[test]
    fn empty_universe_has_the_empty_cover() {
        assert_eq!(exact_covers(0, &[0b1]), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn infeasible_instances_have_no_cover() {
        // No block contains bit 2.
        assert!(exact_covers(0b111, &[0b011, 0b001]).is_empty());
        // The only blocks overlap on bit 1.
        assert!(exact_covers(0b111, &[0b011, 0b110]).is_empty());
    }

    #[test]
    fn blocks_escaping_the_universe_are_ignored() {
        assert_eq!(exact_covers(0b11, &[0b111, 0b11]), vec![vec![1]]);
    }
}
