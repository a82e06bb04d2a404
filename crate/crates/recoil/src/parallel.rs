//! Task planning and threaded execution of split decodes.
//!
//! Each split point opens one decode task: the task enters the stream at the
//! point's word offset with the point's per-lane seed states, walks downward
//! to the previous point's synchronization start, and commits only the
//! window it owns. The stretch between a point's synchronization start and
//! its boundary is decoded twice, once as warm-up by the task entering there
//! (uncommitted) and once by the task above it (committed), which is what
//! makes the windows line up into exactly one copy of the sequence.
//!
//! Tasks are independent, so they are striped over scoped threads; the
//! output buffer is pre-split into disjoint commit windows, one per task.

use crate::container::Container;
use crate::error::{Error, Result};
use crate::interleaved::{decode_range, group_of, index_of, DecodeRange};
use crate::rans::StreamCursor;

/// Everything one decode task needs besides the shared stream and model.
#[derive(Debug, Clone)]
pub struct TaskPlan {
    /// Stream cursor start; the task reads words below this position.
    pub cursor_pos: usize,
    /// First (highest) symbol index the task decodes.
    pub start_index: u64,
    /// Last (lowest) symbol index the task decodes.
    pub stop_index: u64,
    /// Inclusive window of indices this task commits to the output. Empty
    /// when `commit_lo > commit_hi`.
    pub commit_lo: u64,
    pub commit_hi: u64,
    /// Per-lane `(seed state, wake group)` for a mid-stream entry; `None`
    /// for the final task, which starts from the stored final states.
    pub anchors: Option<Vec<(u16, u64)>>,
}

impl TaskPlan {
    pub fn commit_len(&self) -> usize {
        if self.commit_hi >= self.commit_lo {
            (self.commit_hi - self.commit_lo + 1) as usize
        } else {
            0
        }
    }
}

/// Lay out one decode task per split section and validate that the sections
/// tile the sequence.
pub fn plan_tasks(c: &Container) -> Result<Vec<TaskPlan>> {
    let lanes = c.lanes as u64;
    if c.lanes == 0 || c.final_states.len() != c.lanes as usize {
        return Err(Error::InconsistentMetadata("lane count and states disagree"));
    }
    let points = &c.table.points;
    let mut prev_boundary = 0u64;
    let mut prev_offset: Option<u64> = None;
    for p in points {
        if p.anchor_states.len() != c.lanes as usize
            || p.anchor_groups.len() != c.lanes as usize
        {
            return Err(Error::InconsistentMetadata("split record width mismatch"));
        }
        let mut lo = u64::MAX;
        let mut hi = 0u64;
        for (j, &g) in p.anchor_groups.iter().enumerate() {
            if g == 0 {
                return Err(Error::InconsistentMetadata("split group out of range"));
            }
            let idx = index_of(g, j as u64 + 1, lanes);
            lo = lo.min(idx);
            hi = hi.max(idx);
        }
        if lo != p.sync_start || hi != p.boundary_index {
            return Err(Error::InconsistentMetadata("split point fields disagree"));
        }
        if hi > c.n_symbols {
            return Err(Error::InconsistentMetadata("split anchor beyond the data"));
        }
        if hi <= prev_boundary || lo <= prev_boundary {
            return Err(Error::InconsistentMetadata("split sections overlap"));
        }
        if p.word_offset >= c.words.len() as u64 {
            return Err(Error::InconsistentMetadata("split offset out of range"));
        }
        if prev_offset.is_some_and(|o| p.word_offset <= o) {
            return Err(Error::InconsistentMetadata("split offsets not increasing"));
        }
        debug_assert_eq!(group_of(hi, lanes), p.max_group());
        prev_boundary = hi;
        prev_offset = Some(p.word_offset);
    }

    let tasks = points.len() + 1;
    let mut plans = Vec::with_capacity(tasks);
    for k in 0..tasks {
        let (cursor_pos, start_index, anchors) = if k < points.len() {
            let p = &points[k];
            let anchors: Vec<(u16, u64)> = p
                .anchor_states
                .iter()
                .copied()
                .zip(p.anchor_groups.iter().copied())
                .collect();
            (p.word_offset as usize + 1, p.boundary_index, Some(anchors))
        } else {
            (c.words.len(), c.n_symbols, None)
        };
        let stop_index = if k > 0 { points[k - 1].sync_start } else { 1 };
        let commit_hi = if k < points.len() {
            points[k].sync_start - 1
        } else {
            c.n_symbols
        };
        plans.push(TaskPlan {
            cursor_pos,
            start_index,
            stop_index,
            commit_lo: stop_index,
            commit_hi,
            anchors,
        });
    }
    Ok(plans)
}

fn run_task(c: &Container, plan: &TaskPlan, out: &mut [u16]) -> Result<()> {
    debug_assert_eq!(out.len(), plan.commit_len());
    let mut states: Vec<Option<u32>> = match &plan.anchors {
        Some(_) => vec![None; c.lanes as usize],
        None => c.final_states.iter().map(|&x| Some(x)).collect(),
    };
    let mut cursor = StreamCursor::new(&c.words, plan.cursor_pos);
    decode_range(
        &mut cursor,
        &mut states,
        &c.model,
        DecodeRange {
            start_index: plan.start_index,
            stop_index: plan.stop_index,
            commit_lo: plan.commit_lo,
            commit_hi: plan.commit_hi,
        },
        plan.anchors.as_deref(),
        out,
        None,
    )
}

/// Decode a container on up to `workers` threads. The result is identical
/// for any worker count; on failure the error of the lowest-numbered failing
/// task is reported.
pub fn decode_container(c: &Container, workers: usize) -> Result<Vec<u16>> {
    let plans = plan_tasks(c)?;
    let mut out = vec![0u16; c.n_symbols as usize];

    // Carve the output into per-task commit windows. The windows are
    // adjacent by construction, so this consumes the buffer exactly.
    let mut jobs: Vec<(usize, &TaskPlan, &mut [u16])> = Vec::with_capacity(plans.len());
    let mut rest: &mut [u16] = &mut out;
    for (i, plan) in plans.iter().enumerate() {
        let (head, tail) = rest.split_at_mut(plan.commit_len());
        jobs.push((i, plan, head));
        rest = tail;
    }
    debug_assert!(rest.is_empty());

    let workers = workers.max(1).min(jobs.len().max(1));
    let mut failure: Option<(usize, Error)> = None;
    if workers == 1 {
        for (i, plan, slice) in jobs {
            if let Err(e) = run_task(c, plan, slice) {
                failure = Some((i, e));
                break;
            }
        }
    } else {
        let mut buckets: Vec<Vec<(usize, &TaskPlan, &mut [u16])>> =
            (0..workers).map(|_| Vec::new()).collect();
        for job in jobs {
            buckets[job.0 % workers].push(job);
        }
        let results = std::thread::scope(|s| {
            let handles: Vec<_> = buckets
                .into_iter()
                .map(|bucket| {
                    s.spawn(move || {
                        bucket
                            .into_iter()
                            .map(|(i, plan, slice)| (i, run_task(c, plan, slice)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("decode worker panicked"))
                .collect::<Vec<_>>()
        });
        for (i, r) in results {
            if let Err(e) = r {
                if failure.as_ref().map_or(true, |(fi, _)| i < *fi) {
                    failure = Some((i, e));
                }
            }
        }
    }
    match failure {
        Some((_, e)) => Err(e),
        None => Ok(out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::container::encode_to_container;
    use crate::interleaved;
    use crate::model::{quantize, Histogram};

    fn skewed_symbols(seed: u64, len: usize, alphabet: &[u16]) -> Vec<u16> {
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        (0..len)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                let r = (state >> 8) as usize;
                alphabet[(r % alphabet.len()).min(r % (alphabet.len() * 2 / 3 + 1))]
            })
            .collect()
    }

    #[test]
    fn windows_tile_the_sequence() {
        let symbols = skewed_symbols(1, 25_000, &[0, 1, 2, 3, 4]);
        let c = encode_to_container(&symbols, 8, 11, 8, 12).unwrap();
        let plans = plan_tasks(&c).unwrap();
        assert_eq!(plans.len() as u64, c.tasks());

        let mut next_lo = 1u64;
        for plan in &plans {
            assert_eq!(plan.commit_lo, next_lo);
            assert!(plan.start_index >= plan.commit_hi);
            assert!(plan.stop_index == plan.commit_lo);
            next_lo = plan.commit_hi + 1;
        }
        assert_eq!(next_lo, c.n_symbols + 1);
        assert_eq!(plans.last().unwrap().cursor_pos, c.words.len());
        for plan in &plans[..plans.len() - 1] {
            assert!(plan.cursor_pos <= c.words.len());
            assert!(plan.anchors.is_some());
        }
    }

    #[test]
    fn any_worker_count_matches_serial_decode() {
        let symbols = skewed_symbols(2, 40_000, &[0, 1, 2, 3, 4, 5, 6, 7]);
        let c = encode_to_container(&symbols, 8, 11, 32, 16).unwrap();
        assert!(c.tasks() > 4);
        let serial =
            interleaved::decode(&c.words, &c.final_states, &c.model, c.n_symbols, c.n_symbols)
                .unwrap();
        assert_eq!(serial, symbols);
        for workers in [1, 2, 3, 7, 16, 64] {
            assert_eq!(decode_container(&c, workers).unwrap(), symbols);
        }
    }

    #[test]
    fn task_counts_from_one_up_roundtrip() {
        let symbols = skewed_symbols(3, 12_000, &[0, 1, 2]);
        for tasks in [1u64, 2, 3, 5, 8, 16] {
            let c = encode_to_container(&symbols, 8, 10, 4, tasks).unwrap();
            assert!(c.tasks() <= tasks);
            assert_eq!(decode_container(&c, 4).unwrap(), symbols, "tasks={tasks}");
        }
    }

    #[test]
    fn degenerate_inputs() {
        let empty = encode_to_container(&[], 8, 11, 16, 8).unwrap();
        assert!(decode_container(&empty, 4).unwrap().is_empty());

        let flat = vec![9u16; 4000];
        let c = encode_to_container(&flat, 8, 11, 8, 8).unwrap();
        assert_eq!(c.tasks(), 1, "nothing to split on");
        assert_eq!(decode_container(&c, 4).unwrap(), flat);
    }

    #[test]
    fn tampered_point_fields_are_rejected() {
        let symbols = skewed_symbols(4, 20_000, &[0, 1, 2, 3]);
        let mut c = encode_to_container(&symbols, 8, 11, 8, 8).unwrap();
        assert!(c.tasks() >= 3);
        c.table.points[0].sync_start += 1;
        assert!(matches!(
            plan_tasks(&c),
            Err(Error::InconsistentMetadata("split point fields disagree"))
        ));
    }

    #[test]
    fn uninitialized_lane_in_commit_window_is_a_sync_failure() {
        let mut h = Histogram::new(8).unwrap();
        for (s, c) in [(0u16, 3), (1, 1)] {
            for _ in 0..c {
                h.record(s).unwrap();
            }
        }
        let m = quantize(&h, 4).unwrap();
        let symbols = skewed_symbols(5, 50, &[0, 1]);
        let enc = interleaved::encode(&symbols, &m, 2).unwrap();

        // Lane 2 is never initialized and has no anchor, yet the commit
        // window claims its symbols: the engine must refuse rather than
        // emit unset output.
        let mut states = vec![Some(enc.final_states[0]), None];
        let mut cursor = StreamCursor::new(&enc.words, enc.words.len());
        let mut out = vec![0u16; 50];
        let err = decode_range(
            &mut cursor,
            &mut states,
            &m,
            DecodeRange {
                start_index: 50,
                stop_index: 1,
                commit_lo: 1,
                commit_hi: 50,
            },
            None,
            &mut out,
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::SyncFailure { lane: 2, index: 50 }));
    }
}
