/// In-place Walsh–Hadamard transform in natural (Hadamard) order:
/// `out[k] = Σ_j (-1)^{popcount(j & k)} in[j]`.
///
/// # Panics
/// If the length is not a power of two.
pub fn fwht(values: &mut [f64]) {
    let len = values.len();
    assert!(len.is_power_of_two(), "length {len} is not a power of two");
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(2 * h) {
            for j in block..block + h {
                let (a, b) = (values[j], values[j + h]);
                values[j] = a + b;
                values[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_sum() {
        let input: Vec<f64> = (0..16).map(|k| ((k * 7 + 3) % 11) as f64 / 10.0).collect();
        let mut fast = input.clone();
        fwht(&mut fast);
        for (k, f) in fast.iter().enumerate() {
            let direct: f64 = input
                .iter()
                .enumerate()
                .map(|(j, v)| {
                    if (j & k).count_ones() % 2 == 0 {
                        *v
                    } else {
                        -*v
                    }
                })
                .sum();
            assert!((f - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn point_mass_is_flat() {
        let mut v = vec![0.0; 8];
        v[0] = 1.0;
        fwht(&mut v);
        assert!(v.iter().all(|&x| x == 1.0));
    }
}
