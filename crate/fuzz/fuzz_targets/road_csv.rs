#![no_main]

use libfuzzer_sys::fuzz_target;
use vbi_core::road::RoadUnevenness;

fuzz_target!(|data: &[u8]| {
    let Ok(road) = RoadUnevenness::read_csv(data) else {
        return;
    };
    let mut buf = Vec::new();
    road.write_csv(&mut buf).expect("write parsed road");
    let again = RoadUnevenness::read_csv(buf.as_slice()).expect("re-read written road");
    assert_eq!(road.len(), again.len());
});
