use crate::codec::{GooseFrame, UtcTime};

use super::config::GoosePublication;

const MS: u64 = 1_000_000;

/// GOOSE state machine: a new state number on every dataset change,
/// retransmitted on the configured burst schedule and then at the stable
/// interval.
#[derive(Debug, Clone)]
pub struct GoosePublisher {
    template: GooseFrame,
    intervals_ns: Vec<u64>,
    stable_ns: u64,
    /// Index into `intervals_ns` of the wait before the next transmission.
    stage: usize,
    next_tx_ns: u64,
    /// Added to relay time when stamping frames.
    epoch_ns: u64,
}

impl GoosePublisher {
    /// Builds the publisher and its first frame (`st_num` 1) at `now_ns`.
    pub fn new(cfg: &GoosePublication, values: Vec<bool>, now_ns: u64) -> (Self, GooseFrame) {
        Self::with_epoch(cfg, values, now_ns, 0)
    }

    /// As [`GoosePublisher::new`], stamping frames with `epoch_ns + now`.
    pub fn with_epoch(cfg: &GoosePublication, values: Vec<bool>, now_ns: u64, epoch_ns: u64) -> (Self, GooseFrame) {
        let template = GooseFrame {
            dst_mac: cfg.dst_mac,
            src_mac: cfg.src_mac,
            app_id: cfg.app_id,
            gocb_ref: cfg.gocb_ref.clone(),
            dataset_ref: cfg.dataset_ref.clone(),
            go_id: cfg.go_id.clone(),
            conf_rev: cfg.conf_rev,
            timestamp: UtcTime::from_nanos(epoch_ns + now_ns),
            st_num: 1,
            sq_num: 0,
            values,
            ..GooseFrame::default()
        };
        let mut p = Self {
            template,
            intervals_ns: cfg.retransmit_ms.iter().map(|ms| (ms * MS as f64).round() as u64).collect(),
            stable_ns: (cfg.stable_ms * MS as f64).round() as u64,
            stage: 0,
            next_tx_ns: 0,
            epoch_ns,
        };
        p.schedule(now_ns);
        let first = p.frame();
        (p, first)
    }

    fn wait_ns(&self, stage: usize) -> u64 {
        self.intervals_ns.get(stage).copied().unwrap_or(self.stable_ns)
    }

    fn schedule(&mut self, now_ns: u64) {
        let wait = self.wait_ns(self.stage);
        self.next_tx_ns = now_ns + wait;
        // Time allowed to live is twice the wait for the next message.
        self.template.ttl_ms = (2 * wait / MS).max(1) as u32;
    }

    fn frame(&self) -> GooseFrame {
        self.template.clone()
    }

    /// Publishes a new state if `values` differs from the current dataset.
    pub fn update(&mut self, values: &[bool], now_ns: u64) -> Option<GooseFrame> {
        if values == self.template.values.as_slice() {
            return None;
        }
        self.template.values.clear();
        self.template.values.extend_from_slice(values);
        self.template.st_num = self.template.st_num.wrapping_add(1).max(1);
        self.template.sq_num = 0;
        self.template.timestamp = UtcTime::from_nanos(self.epoch_ns + now_ns);
        self.stage = 0;
        self.schedule(now_ns);
        Some(self.frame())
    }

    /// Retransmission due at `now_ns`, if any.
    pub fn poll(&mut self, now_ns: u64) -> Option<GooseFrame> {
        if now_ns < self.next_tx_ns {
            return None;
        }
        let due = self.next_tx_ns;
        self.template.sq_num = self.template.sq_num.wrapping_add(1);
        self.stage = (self.stage + 1).min(self.intervals_ns.len());
        self.schedule(due);
        Some(self.frame())
    }

    pub fn next_due_ns(&self) -> u64 {
        self.next_tx_ns
    }

    pub fn current(&self) -> &GooseFrame {
        &self.template
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(p: &mut GoosePublisher, from: u64, to: u64, step: u64) -> Vec<(u64, GooseFrame)> {
        let mut out = Vec::new();
        let mut t = from;
        while t <= to {
            if let Some(f) = p.poll(t) {
                out.push((t, f));
            }
            t += step;
        }
        out
    }

    #[test]
    fn burst_then_stable() {
        let cfg = GoosePublication::default();
        let (mut p, first) = GoosePublisher::new(&cfg, vec![false; 13], 0);
        assert_eq!((first.st_num, first.sq_num), (1, 0));
        let mut v = vec![false; 13];
        v[0] = true;
        let t0 = 5 * MS;
        let changed = p.update(&v, t0).unwrap();
        assert_eq!((changed.st_num, changed.sq_num), (2, 0));
        assert_eq!(changed.ttl_ms, 4);
        let sent = run(&mut p, t0, t0 + 3100 * MS, MS / 10);
        let offsets: Vec<u64> = sent.iter().map(|(t, _)| (t - t0) / MS).collect();
        assert_eq!(offsets, [2, 6, 14, 30, 1030, 2030, 3030]);
        for (k, (_, f)) in sent.iter().enumerate() {
            assert_eq!(f.st_num, 2);
            assert_eq!(f.sq_num, k as u32 + 1);
        }
        assert_eq!(sent.last().unwrap().1.ttl_ms, 2000);
    }

    #[test]
    fn unchanged_values_publish_nothing() {
        let (mut p, _) = GoosePublisher::new(&GoosePublication::default(), vec![false; 13], 0);
        assert!(p.update(&[false; 13], 10).is_none());
    }
}
