//! Drives a preference session by hand: ask for a query, answer it, save the
//! state to JSON and resume from the saved copy.
//!
//! Answer each comparison with `l` (left, the new candidate), `r` (right,
//! the current best) or `t` (no preference). Without a terminal the example
//! answers for a decision maker who likes points near (1, 0.5).
//!
//! cargo run --release --example interactive_session

use std::io::{self, BufRead, IsTerminal, Write};

use gmrs::domain::ConstraintSet;
use gmrs::gmrs::{Observation, Query};
use gmrs::{GmrsConfig, Mode, SessionState};

fn scripted(q: &Query) -> i8 {
    let d = |x: &[f64]| (x[0] - 1.0).powi(2) + (x[1] - 0.5).powi(2);
    if d(&q.candidate) < d(q.incumbent.as_deref().unwrap()) {
        -1
    } else {
        1
    }
}

fn ask(q: &Query, lines: &mut impl Iterator<Item = io::Result<String>>) -> io::Result<i8> {
    loop {
        print!(
            "left {:.3?} or right {:.3?}? [l/r/t] ",
            q.candidate,
            q.incumbent.as_deref().unwrap()
        );
        io::stdout().flush()?;
        match lines.next().transpose()?.as_deref().map(str::trim) {
            Some("l") => return Ok(-1),
            Some("r") => return Ok(1),
            Some("t") => return Ok(0),
            None => return Ok(scripted(q)),
            _ => println!("please type l, r or t"),
        }
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = GmrsConfig {
        mode: Mode::Preference,
        n_init: 4,
        n_max: 16,
        ..GmrsConfig::default()
    };
    let mut state = SessionState::new(cfg, ConstraintSet::new(vec![-1.0, -1.0], vec![2.0, 1.0])?)?;
    let interactive = io::stdin().is_terminal();
    let mut lines = io::stdin().lock().lines();

    while let Some(q) = state.next_query()? {
        let b = if interactive {
            ask(&q, &mut lines)?
        } else {
            scripted(&q)
        };
        let rec = state.submit(Some(&q.token), Observation::Preference(b))?;
        println!(
            "{} ({:?}, {} left): improved = {}",
            q.token,
            rec.phase,
            q.remaining - 1,
            rec.improved
        );

        // A saved session resumes exactly where it stopped.
        if q.token == "q5" {
            let saved = serde_json::to_string(&state)?;
            state = serde_json::from_str(&saved)?;
            println!("saved and restored a {} byte session", saved.len());
        }
    }
    println!("best = {:?}", state.best_sample().unwrap());
    Ok(())
}
