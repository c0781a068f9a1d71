#![no_main]

use libfuzzer_sys::fuzz_target;
use planar_spin::equation::{read_records, Integration, Trajectory};
use planar_spin::Convention;

fuzz_target!(|data: &[u8]| {
    let Ok(records) = read_records(data) else { return };
    assert!(records.iter().all(|r| r.t.is_finite()));
    if let Ok(traj) = Trajectory::from_csv(data, 1.0, Integration::rk4(1e-3), &Convention::DEFAULT) {
        let mut out = Vec::new();
        traj.write_csv(&mut out).unwrap();
        assert_eq!(read_records(out.as_slice()).unwrap(), records);
    }
});
