//! Set-level reception semantics against a full-matrix GF(2^8) decoder that
//! tracks every equation a receiver ever accepted.

use o2onc::gf_oracle::fresh_equation;
use o2onc::{Classification, PacketSet, ReceiverState};
use rand::seq::IteratorRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mul(mut a: u8, mut b: u8) -> u8 {
    let mut p = 0u8;
    while b != 0 {
        if b & 1 == 1 {
            p ^= a;
        }
        let hi = a & 0x80;
        a <<= 1;
        if hi != 0 {
            a ^= 0x1b;
        }
        b >>= 1;
    }
    p
}

fn inv(a: u8) -> u8 {
    (1..=255).find(|&b| mul(a, b) == 1).unwrap()
}

/// Row space in reduced echelon form.
#[derive(Clone)]
struct Decoder {
    n: usize,
    rows: Vec<Vec<u8>>,
}

impl Decoder {
    fn new(n: usize, known: &PacketSet) -> Self {
        let mut d = Self {
            n,
            rows: Vec::new(),
        };
        for p in known.iter() {
            let mut r = vec![0; n];
            r[p] = 1;
            d.insert(r);
        }
        d
    }

    fn reduce(&self, mut r: Vec<u8>) -> Vec<u8> {
        for row in &self.rows {
            let piv = row.iter().position(|&c| c != 0).unwrap();
            let f = r[piv];
            if f != 0 {
                for (x, &y) in r.iter_mut().zip(row) {
                    *x ^= mul(f, y);
                }
            }
        }
        r
    }

    /// Adds `r`; false if it was already in the span.
    fn insert(&mut self, r: Vec<u8>) -> bool {
        let mut r = self.reduce(r);
        let Some(piv) = r.iter().position(|&c| c != 0) else {
            return false;
        };
        let s = inv(r[piv]);
        r.iter_mut().for_each(|c| *c = mul(*c, s));
        for row in &mut self.rows {
            let f = row[piv];
            if f != 0 {
                for (x, &y) in row.iter_mut().zip(&r) {
                    *x ^= mul(f, y);
                }
            }
        }
        self.rows.push(r);
        true
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    fn decoded(&self) -> PacketSet {
        (0..self.n)
            .filter(|&p| {
                let mut e = vec![0; self.n];
                e[p] = 1;
                self.reduce(e).iter().all(|&c| c == 0)
            })
            .collect()
    }
}

fn row(eq: &o2onc::gf_oracle::GfEquation, n: usize) -> Vec<u8> {
    (0..n).map(|p| eq.coeff(p)).collect()
}

#[derive(Default, Debug)]
pub struct Tally {
    pub receptions: usize,
    pub decodes: usize,
    pub aggregations: usize,
    pub aggregation_attempts: usize,
    pub singular: usize,
    pub disagreements: usize,
}

fn pick_combo<R: Rng>(rng: &mut R, s: &ReceiverState) -> PacketSet {
    let n = s.frame_size();
    let side: PacketSet = s.has().iter().filter(|_| rng.gen_bool(0.3)).collect();
    let k = s.vertex_sets().len();
    let roll = rng.gen_range(0..10);
    let combo = if roll < 4 || k < 2 {
        s.vertex_sets()[rng.gen_range(0..k)].union(&side)
    } else if roll < 8 {
        let ab = (0..k).choose_multiple(rng, 2);
        s.vertex_sets()[ab[0]]
            .union(&s.vertex_sets()[ab[1]])
            .union(&side)
    } else {
        (0..n).filter(|_| rng.gen_bool(0.4)).collect()
    };
    if combo.is_empty() {
        PacketSet::singleton(rng.gen_range(0..n))
    } else {
        combo
    }
}

pub fn run(seed: u64, target: usize) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::default();
    while t.receptions < target {
        let n = rng.gen_range(4..=12);
        let has: PacketSet = (0..n).filter(|_| rng.gen_bool(0.3)).collect();
        let mut s = ReceiverState::new(0, n, has, 0.1)
            .unwrap()
            .with_equations(Vec::new())
            .unwrap();
        let mut dec = Decoder::new(n, &has);
        for _ in 0..40 {
            if s.is_complete() {
                break;
            }
            let combo = pick_combo(&mut rng, &s);
            let eq = fresh_equation(combo, &mut rng);
            let before = s.oracle_divergences();
            let predicted = s.classify(&combo).unwrap();
            let target = match predicted {
                Classification::Decodes(v) => s.vertex_sets()[v],
                _ => PacketSet::new(),
            };
            let got = s.apply_reception(&combo, Some(&eq)).unwrap();
            let singular = s.oracle_divergences() > before;
            t.receptions += 1;

            let mut trial = dec.clone();
            let innovative = trial.insert(row(&eq, n));
            let newly = trial.decoded().difference(&dec.decoded());
            let agrees = match predicted {
                Classification::NonInnovative => !innovative,
                Classification::Decodes(_) => singular || (innovative && newly == target),
                Classification::Aggregates(..) => {
                    t.aggregation_attempts += 1;
                    singular || (innovative && newly.is_empty())
                }
                Classification::Discardable => newly.is_empty(),
            };
            if singular {
                t.singular += 1;
                assert_eq!(got, Classification::NonInnovative);
            }
            if !agrees {
                t.disagreements += 1;
                eprintln!("seed {seed}: {combo} predicted {predicted:?}, decoder gained {newly}");
            }
            if got.is_beneficial() {
                dec = trial;
                match got {
                    Classification::Decodes(_) => t.decodes += 1,
                    _ => t.aggregations += 1,
                }
            }
            assert_eq!(dec.decoded(), s.has(), "decoded set drifted from Has");
            assert!(dec.rank() >= s.has().len());
        }
    }
    t
}
