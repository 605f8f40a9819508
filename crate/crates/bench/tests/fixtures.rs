use dbs_bench::{epa_channels, narrowband_gains};

#[test]
fn fixtures_are_seeded() {
    assert_eq!(narrowband_gains(1, 16), narrowband_gains(1, 16));
    assert_ne!(narrowband_gains(1, 16), narrowband_gains(2, 16));
    let ch = epa_channels(3, 4);
    assert_eq!(ch.len(), 4);
    assert!(ch.iter().all(|c| c.tap_gains.len() == 7));
    assert_eq!(ch, epa_channels(3, 4));
}
