use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{G2Point, Scalar};
use crate::ngs::{
    gvf, ikg, iss, join, judge, nick, okg, open, sign, trace, ukg, uvf, GroupState, NgsError,
    UserIndex,
};

/// Size of the group the experiment runs in. Members other than the
/// subject are joined honestly so that opening has to scan past them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub group_size: u32,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig { group_size: 1 }
    }
}

/// State corruption applied just before opening.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Copies the subject's registration entry to another index.
    DuplicateEntry,
    /// Replaces the subject's encrypted trapdoor with an unrelated one.
    ScrambledTrapdoor,
}

/// Runs the correctness experiment and returns its conjunction. Integrity
/// errors from opening are passed through; any other failure reads as
/// `false`.
pub fn correctness_experiment(
    cfg: ExperimentConfig,
    i: UserIndex,
    m: &[u8],
    seed: u64,
    fault: Option<Fault>,
) -> Result<bool, NgsError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let issuer = ikg(&mut rng);
    let opener = okg(&mut rng);
    let mut state = GroupState::with_keys(issuer.public, opener.public);

    let mut subject = None;
    let others = (0..cfg.group_size).map(UserIndex).filter(|&j| j != i);
    for j in std::iter::once(i).chain(others) {
        let kp = ukg(j, &mut state, &mut rng)?;
        let (ms, req) = join(&kp.usk, &opener.public, &mut rng);
        if iss(j, &issuer.secret, &req, &opener.public, &mut state).is_err() {
            return Ok(false);
        }
        if j == i {
            subject = Some(ms);
        }
    }
    let ms = subject.expect("subject joined first");

    let r = Scalar::random(&mut rng, true);
    let nk = nick(state.mpk(i).expect("issued above"), &r)?;
    let sigma = sign(&nk, &ms.msk, m, &mut rng)?;

    match fault {
        None => {}
        Some(Fault::DuplicateEntry) => {
            let spare = UserIndex(i.0.wrapping_add(cfg.group_size.max(1)));
            let entry = state.reg(i).expect("issued above").clone();
            let mpk = *state.mpk(i).expect("issued above");
            state.force_entry(spare, entry, mpk);
        }
        Some(Fault::ScrambledTrapdoor) => {
            let mut entry = state.reg(i).expect("issued above").clone();
            entry.enc_trapdoor.f_prime = entry.enc_trapdoor.f_prime * G2Point::generator();
            state.write_reg(i, entry)?;
        }
    }

    let (i_opened, proof) = match open(&opener.secret, &nk, &state, &mut rng) {
        Ok(v) => v,
        Err(e) if e.is_integrity() => return Err(e),
        Err(_) => return Ok(false),
    };
    Ok(i_opened == i
        && gvf(&issuer.public, &nk)
        && uvf(&nk, m, &sigma)
        && judge(&nk, i, &issuer.public, &proof, state.upk_table())
        && trace(&issuer.public, &ms.trapdoor, &nk))
}

pub fn run_correctness(cfg: ExperimentConfig, i: UserIndex, m: &[u8], seed: u64) -> bool {
    matches!(correctness_experiment(cfg, i, m, seed, None), Ok(true))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn honest_runs_are_correct() {
        let cfg = ExperimentConfig { group_size: 3 };
        for seed in 0..3 {
            assert!(run_correctness(
                cfg,
                UserIndex(seed as u32 % 3),
                b"hello",
                seed
            ));
        }
        assert!(run_correctness(
            ExperimentConfig::default(),
            UserIndex(7),
            b"",
            99
        ));
    }

    #[test]
    fn faults_are_detected() {
        let cfg = ExperimentConfig { group_size: 2 };
        let dup = correctness_experiment(cfg, UserIndex(1), b"m", 5, Some(Fault::DuplicateEntry));
        assert!(dup.unwrap_err().is_integrity());
        let scr =
            correctness_experiment(cfg, UserIndex(1), b"m", 5, Some(Fault::ScrambledTrapdoor));
        assert_eq!(scr, Ok(false));
    }
}
