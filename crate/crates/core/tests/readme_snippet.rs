//! Keeps the README's library example honest.

use dca_core::*;

#[test]
fn readme_example_compiles_and_runs() {
    let dataset = generate_session(&SessionConfig::attack(42)).unwrap();
    let weights = derive_weights(2.0, 2.0).unwrap();
    let log = run(&dataset, &Params::default(), &weights, MappingCode::M1).unwrap();
    let result = classify(&compute_mcav(&log).unwrap(), 0.5).unwrap();
    for (process, (entry, label)) in result.iter() {
        println!("{process}: mcav {:.4} -> {}", entry.mcav(), label.as_str());
    }
    assert_eq!(
        result.label(&AntigenType::new("nmap").unwrap()),
        Some(Label::Anomalous)
    );
}
