use super::SimRng;

const NONE: u32 = u32::MAX;

#[derive(Debug, Default)]
pub(crate) struct Scratch {
    dest: Vec<u32>,
    buckets: Buckets,
    choice: Vec<u32>,
    seen: Vec<u32>,
    inbox: Vec<u32>,
}

#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct RoundTally {
    pub requests: u64,
    pub responses: u64,
    pub commits: u64,
}

/// Item indices grouped by destination: the items sent to bin `b` are
/// `by_bin[offsets[b]..offsets[b + 1]]`, in increasing index order.
#[derive(Debug, Default)]
pub(crate) struct Buckets {
    pub offsets: Vec<u32>,
    pub by_bin: Vec<u32>,
    cursor: Vec<u32>,
    block_offsets: Vec<u32>,
    staged: Vec<(u32, u32)>,
}

// bins per block in the first pass of the two-pass scatter
const BLOCK_SHIFT: u32 = 12;

impl Buckets {
    /// Groups the indices `0..dest.len()`.
    pub fn fill(&mut self, dest: &[u32], bins: usize) {
        self.fill_with(dest, bins, |i| i as u32);
    }

    /// Groups `label(i)` instead of the index `i`; `label` is called exactly
    /// once per index, in increasing order.
    pub fn fill_with(&mut self, dest: &[u32], bins: usize, mut label: impl FnMut(usize) -> u32) {
        let offsets = &mut self.offsets;
        offsets.clear();
        offsets.resize(bins + 1, 0);
        for &d in dest {
            offsets[d as usize + 1] += 1;
        }
        for b in 0..bins {
            offsets[b + 1] += offsets[b];
        }
        let by_bin = &mut self.by_bin;
        by_bin.clear();
        by_bin.resize(dest.len(), 0);
        let cursor = &mut self.cursor;
        cursor.clear();
        cursor.extend_from_slice(&offsets[..bins]);
        if bins <= 1 << 16 {
            for (i, &d) in dest.iter().enumerate() {
                let c = &mut cursor[d as usize];
                by_bin[*c as usize] = label(i);
                *c += 1;
            }
            return;
        }

        // A direct scatter into a large table misses cache on every write,
        // so stage items by block of bins first; both passes are stable.
        let blocks = (bins >> BLOCK_SHIFT) + 1;
        let bo = &mut self.block_offsets;
        bo.clear();
        bo.resize(blocks + 1, 0);
        for &d in dest {
            bo[(d >> BLOCK_SHIFT) as usize + 1] += 1;
        }
        for b in 0..blocks {
            bo[b + 1] += bo[b];
        }
        let staged = &mut self.staged;
        staged.clear();
        staged.resize(dest.len(), (0, 0));
        let mut block_cursor = bo[..blocks].to_vec();
        for (i, &d) in dest.iter().enumerate() {
            let c = &mut block_cursor[(d >> BLOCK_SHIFT) as usize];
            staged[*c as usize] = (d, label(i));
            *c += 1;
        }
        for &(d, i) in staged.iter() {
            let c = &mut cursor[d as usize];
            by_bin[*c as usize] = i;
            *c += 1;
        }
    }

    pub fn of(&self, bin: usize) -> &[u32] {
        &self.by_bin[self.offsets[bin] as usize..self.offsets[bin + 1] as usize]
    }
}

/// Moves a uniformly random `k`-subset of `items` to the front.
pub(crate) fn choose_subset(rng: &mut SimRng, items: &mut [u32], k: usize) {
    let len = items.len();
    for i in 0..k.min(len) {
        let j = i + rng.below(len - i);
        items.swap(i, j);
    }
}

/// Moves the `k` messages a ranked bin answers to the front: every message of
/// rank below the boundary rank, plus a uniform subset of the boundary rank.
fn select_lowest_ranks(rng: &mut SimRng, items: &mut [u32], k: usize, mask: u32) {
    let boundary = kth_smallest_rank(items, k, mask);
    // [0, below) strictly smaller ranks, [below, tied) the boundary rank
    let mut below = 0;
    for i in 0..items.len() {
        if items[i] & mask < boundary {
            items.swap(i, below);
            below += 1;
        }
    }
    let mut tied = below;
    for i in below..items.len() {
        if items[i] & mask == boundary {
            items.swap(i, tied);
            tied += 1;
        }
    }
    choose_subset(rng, &mut items[below..tied], k - below);
}

fn kth_smallest_rank(items: &mut [u32], k: usize, mask: u32) -> u32 {
    const SMALL: usize = 8;
    if k > SMALL {
        let (_, b, _) = items.select_nth_unstable_by_key(k - 1, |&id| id & mask);
        return *b & mask;
    }
    // the k smallest ranks seen so far, ascending
    let mut best = [u32::MAX; SMALL];
    for &id in items.iter() {
        let r = id & mask;
        if r >= best[k - 1] {
            continue;
        }
        let mut j = k - 1;
        while j > 0 && best[j - 1] > r {
            best[j] = best[j - 1];
            j -= 1;
        }
        best[j] = r;
    }
    best[k - 1]
}

/// Plays one synchronous round for the balls in `pending`, updating `loads`
/// and keeping only the balls that did not commit.
pub(crate) fn play_round(
    rng: &mut SimRng,
    loads: &mut [u32],
    pending: &mut Vec<u32>,
    messages: u32,
    capacity: u32,
    ranked: bool,
    s: &mut Scratch,
) -> RoundTally {
    let bins = loads.len();
    let per_ball = messages as usize;
    let balls = pending.len();
    let total = balls * per_ball;
    // message id = (ball slot << shift) | (rank - 1)
    let shift = u32::BITS - (messages - 1).leading_zeros();
    let mask = (1u32 << shift) - 1;
    assert!(
        (balls as u64) << shift <= u32::MAX as u64,
        "too many messages in one round"
    );

    s.dest.clear();
    s.dest
        .extend((0..total).map(|_| rng.below_u32(bins as u32)));
    // dest is laid out slot-major, so the label follows from the index
    let stride = per_ball;
    if stride.is_power_of_two() {
        s.buckets.fill(&s.dest, bins);
    } else {
        let (mut slot, mut rank) = (0u32, 0u32);
        s.buckets.fill_with(&s.dest, bins, |_| {
            let id = (slot << shift) | rank;
            rank += 1;
            if rank == messages {
                rank = 0;
                slot += 1;
            }
            id
        });
    }

    s.choice.clear();
    s.choice.resize(balls, NONE);
    s.seen.clear();
    s.seen.resize(balls, if ranked { NONE } else { 0 });

    let mut tally = RoundTally {
        requests: total as u64,
        ..RoundTally::default()
    };
    #[allow(clippy::needless_range_loop)] // `bin` also indexes the buckets
    for bin in 0..bins {
        let received = s.buckets.of(bin);
        let free = capacity.saturating_sub(loads[bin]) as usize;
        if received.is_empty() || free == 0 {
            continue;
        }
        let inbox: &[u32] = if received.len() <= free {
            received
        } else {
            s.inbox.clear();
            s.inbox.extend_from_slice(received);
            if ranked {
                select_lowest_ranks(rng, &mut s.inbox, free, mask);
            } else {
                choose_subset(rng, &mut s.inbox, free);
            }
            &s.inbox[..free]
        };
        let answered = inbox.len();
        tally.responses += answered as u64;
        for &id in inbox {
            let slot = (id >> shift) as usize;
            if ranked {
                let rank = id & mask;
                if rank < s.seen[slot] {
                    s.seen[slot] = rank;
                    s.choice[slot] = bin as u32;
                }
            } else {
                // reservoir choice: uniform over this ball's answered messages
                s.seen[slot] += 1;
                let seen = s.seen[slot];
                if seen == 1 || rng.below_u32(seen) == 0 {
                    s.choice[slot] = bin as u32;
                }
            }
        }
    }

    let mut still = Vec::with_capacity(balls / 4);
    for (slot, &ball) in pending.iter().enumerate() {
        match s.choice[slot] {
            NONE => still.push(ball),
            bin => {
                let l = &mut loads[bin as usize];
                *l += 1;
                assert!(*l <= capacity, "bin {bin} exceeds capacity {capacity}");
                tally.commits += 1;
            }
        }
    }
    *pending = still;
    tally
}
