use std::path::Path;

use somlab::config::load_run_config;
use somlab::scenarios::{builtin, BUILTIN_NAMES};

#[test]
fn shipped_files_match_builtins() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    for name in BUILTIN_NAMES {
        let path = dir.join(format!("{name}.json"));
        let file = load_run_config(&path).unwrap_or_else(|e| panic!("{name}: {e}"));
        let run = file.resolve(&dir).unwrap();
        let s = builtin(name).unwrap();
        assert_eq!(run.name.as_deref(), Some(name));
        assert_eq!(run.graph, s.graph, "{name}");
        assert_eq!(run.config, s.config, "{name}");
        assert_eq!(run.initial, s.initial, "{name}");
        assert_eq!(run.expected.as_ref(), Some(&s.expected), "{name}");
    }
}

#[test]
fn bridge_agent_stays_silent() {
    let s = builtin("bridge_dissensus").unwrap();
    let criteria = somlab::analysis::ConvergenceCriteria::fixed_horizon(1000);
    let record = somlab::analysis::run(&s.graph, &s.config, s.initial.clone(), &criteria).unwrap();
    assert!(record.snapshots.iter().skip(1).all(|st| !st.silence.is_speaking(2)));
    assert_eq!(
        somlab::analysis::perpetual_silence_candidates(&record),
        vec![somlab::graph::AgentId(2)]
    );
}
