//! Split-point selection over the encoder's renormalization log.
//!
//! A split point is a word boundary at which an independent decoder can be
//! dropped into the middle of the stream. Scanning the log backward from a
//! candidate emission collects, for every lane, the most recent word it
//! emitted; each such event pins down the lane's exact state at a known
//! symbol index, so a decoder seeded with those states can start reading at
//! the candidate word and resynchronize. Symbols between the earliest and
//! latest pinned indices come out of the warm-up of the next task over, so
//! the selector also tracks that overlap and charges it as waste.

use crate::error::{Error, Result};
use crate::interleaved::{group_of, RenormEvent};

/// A position in the word stream where a decoder can be seeded mid-stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPoint {
    /// Highest symbol index pinned by the scan; the seeded decoder starts at
    /// this symbol. Equals the chosen boundary event's recorded index.
    pub boundary_index: u64,
    /// Lowest symbol index pinned by the scan. Symbols decoded above it (up
    /// to `boundary_index`) repeat work owned by the task to the right.
    pub sync_start: u64,
    /// Stream offset of the boundary event's word; the seeded decoder's
    /// cursor starts just above it.
    pub word_offset: u64,
    /// Per-lane seed states, lane order. Always below 2^16 because every
    /// logged state is a freshly drained one.
    pub anchor_states: Vec<u16>,
    /// Per-lane group at which each seed state becomes live.
    pub anchor_groups: Vec<u64>,
}

impl SplitPoint {
    /// Highest group any lane of this point anchors at; equals the group of
    /// `boundary_index`.
    pub fn max_group(&self) -> u64 {
        self.anchor_groups.iter().copied().max().unwrap_or(0)
    }
}

/// An ordered set of split points for one encoded stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitTable {
    pub lanes: u16,
    pub n_symbols: u64,
    /// Ascending by boundary index and by word offset. `points.len() + 1`
    /// tasks decode the stream.
    pub points: Vec<SplitPoint>,
}

impl SplitTable {
    pub fn task_count(&self) -> usize {
        self.points.len() + 1
    }
}

/// Walk the log backward from `boundary_pos`, collecting each lane's most
/// recent emission, and build the split point those emissions describe.
///
/// Fails with `IncompleteCoverage` when some lane either never emitted at or
/// before the boundary, or last emitted before encoding anything (recorded
/// index zero), since such a lane's state is not pinned to a usable index.
pub fn backward_scan(log: &[RenormEvent], boundary_pos: usize, lanes: u16) -> Result<SplitPoint> {
    let w = lanes as usize;
    let boundary = &log[boundary_pos];
    let mut states: Vec<Option<u16>> = vec![None; w];
    let mut indices: Vec<u64> = vec![0; w];
    let mut missing = w;

    for e in log[..=boundary_pos].iter().rev() {
        let j = (e.lane - 1) as usize;
        if states[j].is_some() {
            continue;
        }
        if e.symbol_index == 0 {
            // A lane's zero-index emissions precede everything else it logs,
            // so hitting one here means the lane has no usable pin.
            return Err(Error::IncompleteCoverage { lane: e.lane });
        }
        debug_assert!(e.post_state < 1 << 16);
        states[j] = Some(e.post_state as u16);
        indices[j] = e.symbol_index;
        missing -= 1;
        if missing == 0 {
            break;
        }
    }
    if missing > 0 {
        let lane = states.iter().position(|s| s.is_none()).unwrap() as u16 + 1;
        return Err(Error::IncompleteCoverage { lane });
    }

    let sync_start = *indices.iter().min().unwrap();
    debug_assert_eq!(
        boundary.symbol_index,
        *indices.iter().max().unwrap(),
        "the boundary emission carries the scan's highest index"
    );
    Ok(SplitPoint {
        boundary_index: boundary.symbol_index,
        sync_start,
        word_offset: boundary.word_offset,
        anchor_states: states.into_iter().map(|s| s.unwrap()).collect(),
        anchor_groups: indices
            .iter()
            .map(|&i| group_of(i, lanes as u64))
            .collect(),
    })
}

/// Imbalance charge for a candidate boundary: `t` symbols would belong to
/// the task being closed, of which the top `t_s` are warm-up overlap with
/// the next task; `target` is the ideal per-task share. Both a task that
/// strays from the target and one whose committed share (`t - t_s`) strays
/// from it are penalized.
pub fn heuristic_cost(t: u64, t_s: u64, target: u64) -> u64 {
    t.abs_diff(target) + (t - t_s).abs_diff(target)
}

/// Pick up to `tasks - 1` split points aiming at equal-sized tasks.
///
/// For each ideal boundary the selector examines logged emissions near it,
/// widening the search window geometrically while nothing is in range, and
/// keeps the scannable candidate with the lowest cost (ties broken toward
/// the earlier stream offset). A boundary with no usable candidate is
/// dropped, yielding fewer tasks rather than a bad cut.
pub fn choose_splits(
    log: &[RenormEvent],
    n_symbols: u64,
    lanes: u16,
    tasks: u64,
) -> Result<SplitTable> {
    if tasks == 0 {
        return Err(Error::InvalidParameter("task count must be at least 1"));
    }
    let mut points: Vec<SplitPoint> = Vec::new();
    if tasks == 1 || n_symbols == 0 || log.is_empty() {
        return Ok(SplitTable {
            lanes,
            n_symbols,
            points,
        });
    }

    let target = n_symbols.div_ceil(tasks);
    let mut prev_boundary = 0u64;
    let mut prev_pos: Option<usize> = None;

    for m in 1..tasks {
        let goal = m * target;
        let mut window = 2 * lanes as u64;
        let chosen = loop {
            let lo = goal.saturating_sub(window);
            let hi = goal.saturating_add(window);
            // The log is ordered by recorded index, so the in-window
            // candidates form one contiguous run.
            let first = log.partition_point(|e| e.symbol_index < lo.max(prev_boundary + 1));
            let last = log.partition_point(|e| e.symbol_index <= hi);
            let first = match prev_pos {
                Some(p) => first.max(p + 1),
                None => first,
            };

            let mut best: Option<(u64, u64, usize, SplitPoint)> = None;
            for pos in first..last {
                let point = match backward_scan(log, pos, lanes) {
                    Ok(p) => p,
                    Err(Error::IncompleteCoverage { .. }) => continue,
                    Err(e) => return Err(e),
                };
                if point.sync_start <= prev_boundary {
                    // Warm-up would reach into the task just closed.
                    continue;
                }
                let t = point.boundary_index - prev_boundary;
                let t_s = point.boundary_index - point.sync_start + 1;
                let cost = heuristic_cost(t, t_s, target);
                let key = (cost, point.word_offset);
                if best.as_ref().map_or(true, |(c, o, _, _)| key < (*c, *o)) {
                    best = Some((cost, point.word_offset, pos, point));
                }
            }
            if let Some((_, _, pos, point)) = best {
                break Some((pos, point));
            }
            if first < last || window >= 2 * n_symbols {
                // Candidates existed but none was usable, or the window
                // already spans everything: give up on this boundary.
                break None;
            }
            window *= 2;
        };
        if let Some((pos, point)) = chosen {
            prev_boundary = point.boundary_index;
            prev_pos = Some(pos);
            points.push(point);
        }
    }

    Ok(SplitTable {
        lanes,
        n_symbols,
        points,
    })
}

/// Thin an existing point list down to at most `tasks` tasks by keeping
/// every k-th point, preferring an even spread without rescanning anything.
pub fn combine_splits(points: &[SplitPoint], tasks: u64) -> Result<Vec<SplitPoint>> {
    if tasks == 0 {
        return Err(Error::InvalidParameter("task count must be at least 1"));
    }
    let stride = ((points.len() as u64 + 1).div_ceil(tasks)) as usize;
    Ok(points
        .iter()
        .enumerate()
        .filter(|(i, _)| (i + 1) % stride == 0)
        .map(|(_, p)| p.clone())
        .collect())
}
