use serde::{Deserialize, Serialize};

use super::FluxBias;

/// Ratio of rf-loop to dc-loop phase produced by the local flux line.
pub const RF_TO_DC_LEAK_RATIO: f64 = 313.0;

/// Affine map from coil and local-line currents to loop phases.
///
/// Only the local-line rf/dc ratio is fixed; the remaining constants are
/// device specific and supplied by the user.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CalibrationConstants {
    /// rf-loop phase per ampere of coil current [rad/A].
    pub coil_to_rf: f64,
    /// rf-loop phase per ampere of local-line current [rad/A].
    pub local_to_rf: f64,
    /// dc-loop phase per ampere of coil current [rad/A].
    pub coil_to_dc: f64,
    pub rf_offset: f64,
    pub dc_offset: f64,
}

/// Loop phases produced by a coil current and a local-line current [A].
pub fn flux_calibration(coil_current: f64, local_current: f64, cal: &CalibrationConstants) -> FluxBias {
    FluxBias {
        phi_ex: cal.coil_to_rf * coil_current + cal.local_to_rf * local_current + cal.rf_offset,
        phi_dc: cal.coil_to_dc * coil_current
            + cal.local_to_rf / RF_TO_DC_LEAK_RATIO * local_current
            + cal.dc_offset,
    }
}
