//! Cached 2-D complex FFTs over row-major `nx x ny` buffers.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::par;

type Plan = Arc<dyn Fft<f64>>;

fn plan(n: usize, direction: FftDirection) -> Plan {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), Plan>>> = OnceLock::new();
    let key = (n, direction == FftDirection::Forward);
    let mut cache = CACHE
        .get_or_init(|| Mutex::new(HashMap::new()))
        .lock()
        .expect("fft plan cache poisoned");
    cache
        .entry(key)
        .or_insert_with(|| FftPlanner::new().plan_fft(n, direction))
        .clone()
}

/// Transforms every contiguous `n`-length row of `buf`.
fn rows(buf: &mut [Complex64], n: usize, direction: FftDirection) {
    let fft = plan(n, direction);
    // Batch several rows per task so each task reuses one scratch buffer.
    let rows_per_task = (buf.len() / n).clamp(1, 16);
    par::for_each_row(buf, n * rows_per_task, |_, chunk| {
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(chunk, &mut scratch);
    });
}

/// Destination rows handled together, so each source row is read in short
/// contiguous runs instead of one element at a time.
const TRANSPOSE_BLOCK: usize = 16;

/// Out-of-place transpose of an `r x c` row-major matrix.
pub(crate) fn transpose(src: &[Complex64], dst: &mut [Complex64], r: usize, c: usize) {
    debug_assert_eq!(src.len(), r * c);
    debug_assert_eq!(dst.len(), r * c);
    par::for_each_row(dst, r * TRANSPOSE_BLOCK, |b, block| {
        let j0 = b * TRANSPOSE_BLOCK;
        let width = block.len() / r;
        for i in 0..r {
            let run = &src[i * c + j0..i * c + j0 + width];
            for (dj, v) in run.iter().enumerate() {
                block[dj * r + i] = *v;
            }
        }
    });
}

/// Unnormalized 2-D DFT of a row-major `nx x ny` buffer, in place.
pub(crate) fn fft2(buf: &mut [Complex64], nx: usize, ny: usize, direction: FftDirection) {
    debug_assert_eq!(buf.len(), nx * ny);
    rows(buf, ny, direction);
    let mut t = vec![Complex64::default(); buf.len()];
    transpose(buf, &mut t, nx, ny);
    rows(&mut t, nx, direction);
    transpose(&t, buf, ny, nx);
}

/// Unnormalized 1-D DFT applied along every length-`n` row.
pub(crate) fn fft_rows(buf: &mut [Complex64], n: usize, direction: FftDirection) {
    rows(buf, n, direction);
}
