//! Level-synchronous work scheduling shared by the customization passes.

use rayon::prelude::*;

/// Worker pool for `threads` workers, or `None` for the sequential path.
pub(crate) fn pool(threads: usize) -> Option<rayon::ThreadPool> {
    if threads <= 1 {
        return None;
    }
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().ok()
}

/// Runs `f` on every item, in parallel when a pool is given. Returns once
/// all items are done, which acts as the barrier between levels.
pub(crate) fn for_each<T: Send>(items: Vec<T>, pool: Option<&rayon::ThreadPool>, f: impl Fn(T) + Sync + Send) {
    match pool {
        Some(p) if items.len() > 1 => p.install(|| items.into_par_iter().for_each(f)),
        _ => items.into_iter().for_each(f),
    }
}

/// Cuts `data` into consecutive pieces of the given lengths.
pub(crate) fn split_lengths<T>(mut data: &mut [T], lengths: impl Iterator<Item = usize>) -> Vec<&mut [T]> {
    let mut out = Vec::new();
    for len in lengths {
        let (piece, rest) = data.split_at_mut(len);
        out.push(piece);
        data = rest;
    }
    out
}
