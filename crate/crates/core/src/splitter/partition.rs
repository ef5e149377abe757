use crate::error::{Error, Result};

/// Every set partition of `items`, as lists of blocks.
///
/// Partitions are produced in restricted-growth-string order: element `i`
/// goes to block `a[i]` with `a[0] = 0` and `a[i] <= 1 + max(a[..i])`. Blocks
/// keep the input order of their elements and are ordered by their first
/// element. The count is the Bell number of `items.len()`.
pub fn enumerate_partitions<T: Clone>(items: &[T], max_items: usize) -> Result<Vec<Vec<Vec<T>>>> {
    if items.len() > max_items {
        return Err(Error::TooManyEvents {
            count: items.len(),
            max: max_items,
        });
    }
    if items.is_empty() {
        return Ok(vec![Vec::new()]);
    }

    let n = items.len();
    let mut out = Vec::new();
    let mut growth = vec![0usize; n];
    // maxes[i] = max(growth[..=i])
    let mut maxes = vec![0usize; n];
    loop {
        let blocks = maxes[n - 1] + 1;
        let mut partition: Vec<Vec<T>> = vec![Vec::new(); blocks];
        for (item, &b) in items.iter().zip(&growth) {
            partition[b].push(item.clone());
        }
        out.push(partition);

        // advance to the next restricted growth string
        let Some(i) = (1..n).rev().find(|&i| growth[i] <= maxes[i - 1]) else {
            break;
        };
        growth[i] += 1;
        maxes[i] = maxes[i - 1].max(growth[i]);
        for j in i + 1..n {
            growth[j] = 0;
            maxes[j] = maxes[i];
        }
    }
    Ok(out)
}
