//! Minimal iterative radix-2 FFT on split real/imaginary buffers.
//!
//! Only power-of-two lengths are supported, which is all the circulant
//! embedding in [`crate::paths`] ever needs.

use std::f64::consts::PI;

/// In-place forward (`inverse = false`) or inverse (`inverse = true`) FFT.
///
/// The inverse transform includes the 1/n normalization. Panics if the two
/// buffers differ in length or the length is not a power of two.
pub fn fft_in_place(re: &mut [f64], im: &mut [f64], inverse: bool) {
    let n = re.len();
    assert_eq!(n, im.len(), "re/im buffers must match");
    assert!(n.is_power_of_two(), "fft length must be a power of two");
    if n <= 1 {
        return;
    }

    // Bit-reversal permutation.
    let mut j = 0usize;
    for i in 0..n - 1 {
        if i < j {
            re.swap(i, j);
            im.swap(i, j);
        }
        let mut mask = n >> 1;
        while j & mask != 0 {
            j ^= mask;
            mask >>= 1;
        }
        j |= mask;
    }

    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2usize;
    while len <= n {
        let ang = sign * 2.0 * PI / len as f64;
        let half = len / 2;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let (s, c) = (ang * k as f64).sin_cos();
                let i = start + k;
                let m = i + half;
                let tr = re[m] * c - im[m] * s;
                let ti = re[m] * s + im[m] * c;
                re[m] = re[i] - tr;
                im[m] = im[i] - ti;
                re[i] += tr;
                im[i] += ti;
            }
        }
        len <<= 1;
    }

    if inverse {
        let scale = 1.0 / n as f64;
        for v in re.iter_mut() {
            *v *= scale;
        }
        for v in im.iter_mut() {
            *v *= scale;
        }
    }
}
