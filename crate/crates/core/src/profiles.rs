//! The six built-in traffic profiles.
//!
//! Rates are in Mbps and volumes in Mbit, with decimal prefixes:
//! 1 Kbps = 0.001 Mbps, 1 Mbyte = 8 Mbit, 1 Kbyte = 0.008 Mbit.

use crate::network::TrafficProfile;
use crate::utility::{PriorityLevel, UtilityFunction};

const MBYTE: f64 = 8.0;
const KBYTE: f64 = 0.008;

fn profile(
    id: u32,
    label: &str,
    priority: u8,
    volume_mbit: [f64; 2],
    utility: UtilityFunction,
) -> TrafficProfile {
    TrafficProfile {
        id,
        label: label.to_owned(),
        priority: PriorityLevel::new(priority).expect("built-in priorities are in range"),
        volume_mbit,
        utility,
    }
}

/// Voice, video conferencing, interactive multimedia, e-mail, remote login,
/// and bulk file transfer.
pub fn builtin_profiles() -> Vec<TrafficProfile> {
    let ok = |r: Result<UtilityFunction, _>| r.expect("built-in parameters are valid");
    vec![
        profile(
            1,
            "Voice service & Audio phone",
            2,
            [1.0 * MBYTE, 6.0 * MBYTE],
            ok(UtilityFunction::hard_real_time(0.030)),
        ),
        profile(
            2,
            "Video-phone & Video conference",
            3,
            [20.0 * MBYTE, 70.0 * MBYTE],
            ok(UtilityFunction::hard_real_time(0.256)),
        ),
        profile(
            3,
            "Interactive Multimedia & VoD",
            2,
            [10.0 * MBYTE, 100.0 * MBYTE],
            ok(UtilityFunction::real_time(1.045, 2.166, 1.0, 4.0)),
        ),
        profile(
            4,
            "E-mail, Paging & Fax",
            1,
            [10.0 * KBYTE, 500.0 * KBYTE],
            ok(UtilityFunction::elastic(4.6, 0.020)),
        ),
        profile(
            5,
            "Remote Login & Data on Demand",
            4,
            [1.0 * MBYTE, 10.0 * MBYTE],
            ok(UtilityFunction::elastic_with_scale(4.6, 0.512, 0.5)),
        ),
        profile(
            6,
            "File Transfer & Retrieval Service",
            1,
            [1.0 * MBYTE, 100.0 * MBYTE],
            ok(UtilityFunction::elastic_with_scale(4.6, 5.0, 10.0)),
        ),
    ]
}
