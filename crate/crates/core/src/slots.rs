//! NR timing: numerologies, self-contained slot layouts and the LBR call flow.
//!
//! Call-flow simulation is slot-quantized: every message occupies a control
//! (or header) region of some slot and is stamped with that slot's index.

use std::fmt;

use crate::error::{Error, Result};

pub const SYMBOLS_PER_SLOT: u32 = 14;
pub const SUBCARRIERS_PER_PRB: u32 = 12;
pub const FRAME_LENGTH_MS: f64 = 10.0;
pub const SUBFRAMES_PER_FRAME: u32 = 10;
/// Maximum channel occupancy time at 60 GHz.
pub const MCOT_60GHZ_MS: f64 = 9.0;

/// Approximate cyclic prefix length (µs) of each numerology, as tabulated.
const CP_LENGTH_US: [f64; 5] = [4.8, 2.4, 1.2, 0.6, 0.3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumerologyConfig {
    pub mu: u32,
    pub scs_khz: f64,
    /// Useful OFDM symbol length, `1 / SCS`.
    pub symbol_length_us: f64,
    pub cp_length_us: f64,
    pub slots_per_subframe: u32,
    pub slot_length_us: f64,
    pub symbols_per_slot: u32,
    pub subcarriers_per_prb: u32,
    pub prb_width_mhz: f64,
}

pub fn numerology(mu: u32) -> Result<NumerologyConfig> {
    if mu > 4 {
        return Err(Error::InvalidNumerology(mu));
    }
    let scale = 1u32 << mu;
    let scs_khz = 15.0 * scale as f64;
    Ok(NumerologyConfig {
        mu,
        scs_khz,
        symbol_length_us: 1000.0 / scs_khz,
        cp_length_us: CP_LENGTH_US[mu as usize],
        slots_per_subframe: scale,
        slot_length_us: 1000.0 / scale as f64,
        symbols_per_slot: SYMBOLS_PER_SLOT,
        subcarriers_per_prb: SUBCARRIERS_PER_PRB,
        prb_width_mhz: SUBCARRIERS_PER_PRB as f64 * scs_khz / 1000.0,
    })
}

/// Percentage of an MCOT left empty when DL access without headers waits one
/// slot for the RtoRx.
pub fn unoccupied_fraction(mu: u32, mcot_ms: f64) -> Result<f64> {
    if mcot_ms.is_nan() || mcot_ms <= 0.0 {
        return Err(Error::param(
            "mcot_ms",
            format!("must be > 0, got {mcot_ms}"),
        ));
    }
    let cfg = numerology(mu)?;
    Ok(100.0 * cfg.slot_length_us / (mcot_ms * 1000.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkDirection {
    Downlink,
    Uplink,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    DlHeader,
    UlHeader,
    DlControl,
    Data,
    Guard,
    UlControl,
}

impl Region {
    /// Headers live in a preparation stage ahead of the 14 slot symbols.
    pub fn is_header(self) -> bool {
        matches!(self, Region::DlHeader | Region::UlHeader)
    }
}

/// Symbol split of the DL control / guard / UL control regions; data takes the rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControlSplit {
    pub dl_control: u32,
    pub guard: u32,
    pub ul_control: u32,
}

impl Default for ControlSplit {
    fn default() -> Self {
        ControlSplit {
            dl_control: 2,
            guard: 1,
            ul_control: 1,
        }
    }
}

/// Where a handshake message is carried, relative to the slot `n` in which
/// the exchange starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MessageSlot {
    pub region: Region,
    pub slot_offset: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotLayout {
    pub direction: LinkDirection,
    pub has_headers: bool,
    /// Header regions (one symbol-equivalent each) followed by the 14 slot symbols.
    pub regions: Vec<(Region, u32)>,
    pub rtotx: MessageSlot,
    pub rtorx: MessageSlot,
    /// Slot offset of the data transmission.
    pub data_slot_offset: u32,
}

impl SlotLayout {
    /// Symbols of the slot proper, excluding any header preparation stage.
    pub fn slot_symbols(&self) -> u32 {
        self.regions
            .iter()
            .filter(|(r, _)| !r.is_header())
            .map(|(_, n)| n)
            .sum()
    }

    /// Slots between the start of the exchange and the data.
    pub fn handshake_latency_slots(&self) -> u32 {
        self.data_slot_offset
    }

    /// Latency added on top of what the link already pays without LBR: no
    /// wait for DL, one SR/grant cycle for UL.
    pub fn extra_latency_slots(&self) -> u32 {
        let baseline = match self.direction {
            LinkDirection::Downlink => 0,
            LinkDirection::Uplink => 1,
        };
        self.data_slot_offset.saturating_sub(baseline)
    }
}

pub fn build_slot_layout(direction: LinkDirection, has_headers: bool) -> SlotLayout {
    build_slot_layout_with(direction, has_headers, ControlSplit::default())
        .expect("default split fits in a slot")
}

pub fn build_slot_layout_with(
    direction: LinkDirection,
    has_headers: bool,
    split: ControlSplit,
) -> Result<SlotLayout> {
    let overhead = split.dl_control + split.guard + split.ul_control;
    if overhead >= SYMBOLS_PER_SLOT || split.dl_control == 0 || split.ul_control == 0 {
        return Err(Error::param(
            "control_split",
            "control regions must be non-empty and leave room for data",
        ));
    }
    let data = SYMBOLS_PER_SLOT - overhead;
    let mut regions = Vec::new();
    let slot = |r: Region, o: u32| MessageSlot {
        region: r,
        slot_offset: o,
    };
    let (rtotx, rtorx, data_slot_offset) = match direction {
        LinkDirection::Downlink => {
            if has_headers {
                regions.push((Region::DlHeader, 1));
                regions.push((Region::UlHeader, 1));
            }
            regions.extend([
                (Region::DlControl, split.dl_control),
                (Region::Data, data),
                (Region::Guard, split.guard),
                (Region::UlControl, split.ul_control),
            ]);
            if has_headers {
                (slot(Region::DlHeader, 0), slot(Region::UlHeader, 0), 0)
            } else {
                (slot(Region::DlControl, 0), slot(Region::UlControl, 0), 1)
            }
        }
        LinkDirection::Uplink => {
            if has_headers {
                regions.push((Region::UlHeader, 1));
            }
            regions.extend([
                (Region::DlControl, split.dl_control),
                (Region::Guard, split.guard),
                (Region::Data, data),
                (Region::UlControl, split.ul_control),
            ]);
            // RtoTx rides with the SR, RtoRx with the UL grant of the next slot
            let rtotx = if has_headers {
                slot(Region::UlHeader, 1)
            } else {
                slot(Region::UlControl, 0)
            };
            (rtotx, slot(Region::DlControl, 1), 1)
        }
    };
    Ok(SlotLayout {
        direction,
        has_headers,
        regions,
        rtotx,
        rtorx,
        data_slot_offset,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CallFlowEvent {
    DataArrival,
    LbtIdle,
    LbtBusy,
    RtoTxSent,
    LbrIdle,
    LbrBusy,
    RtoRxSent,
    Deferred,
    DataTxStart,
}

impl CallFlowEvent {
    pub fn name(self) -> &'static str {
        match self {
            CallFlowEvent::DataArrival => "data_arrival",
            CallFlowEvent::LbtIdle => "lbt_idle",
            CallFlowEvent::LbtBusy => "lbt_busy",
            CallFlowEvent::RtoTxSent => "rtotx_sent",
            CallFlowEvent::LbrIdle => "lbr_idle",
            CallFlowEvent::LbrBusy => "lbr_busy",
            CallFlowEvent::RtoRxSent => "rtorx_sent",
            CallFlowEvent::Deferred => "deferred",
            CallFlowEvent::DataTxStart => "data_tx_start",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimedEvent {
    pub slot: u64,
    pub event: CallFlowEvent,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CallFlowTrace {
    pub events: Vec<TimedEvent>,
}

impl CallFlowTrace {
    fn push(&mut self, slot: u64, event: CallFlowEvent) {
        self.events.push(TimedEvent { slot, event });
    }
}

impl fmt::Display for CallFlowTrace {
    /// One `slot=<n> event=<name>` line per event.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.events {
            writeln!(f, "slot={} event={}", e.slot, e.event.name())?;
        }
        Ok(())
    }
}

/// Upper bound on slots spent waiting in any single sensing loop.
pub const MAX_WAIT_SLOTS: u64 = 1 << 20;

fn wait_until_idle(
    trace: &mut CallFlowTrace,
    start: u64,
    busy: &dyn Fn(u64) -> bool,
    busy_event: CallFlowEvent,
    also: Option<CallFlowEvent>,
    idle_event: CallFlowEvent,
) -> Result<u64> {
    let mut t = start;
    while busy(t) {
        trace.push(t, busy_event);
        if let Some(e) = also {
            trace.push(t, e);
        }
        t += 1;
        if t - start > MAX_WAIT_SLOTS {
            return Err(Error::Domain(format!(
                "channel never became idle after slot {start}"
            )));
        }
    }
    trace.push(t, idle_event);
    Ok(t)
}

/// Replays the RtoTx/RtoRx exchange for each data arrival.
///
/// Per arrival: LBT at the BS (retried every slot while busy), RtoTx, LBR at
/// the MT (each busy slot logs a deferral), RtoRx, then a second LBT before
/// the data goes out. Arrivals that find a previous exchange in progress start
/// in the slot after its data transmission.
pub fn simulate_call_flow(
    arrivals: &[u64],
    busy_at_mt: impl Fn(u64) -> bool,
    busy_at_bs: impl Fn(u64) -> bool,
    layout: &SlotLayout,
) -> Result<CallFlowTrace> {
    if arrivals.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::param("arrivals", "must be sorted"));
    }
    let rtorx_gap = (layout.rtorx.slot_offset - layout.rtotx.slot_offset) as u64;
    let data_gap = (layout.data_slot_offset - layout.rtorx.slot_offset) as u64;
    let mut trace = CallFlowTrace::default();
    let mut next_free = 0u64;
    for &arrival in arrivals {
        trace.push(arrival, CallFlowEvent::DataArrival);
        let start = arrival.max(next_free);
        let lbt = wait_until_idle(
            &mut trace,
            start,
            &busy_at_bs,
            CallFlowEvent::LbtBusy,
            None,
            CallFlowEvent::LbtIdle,
        )?;
        let rtotx = lbt + layout.rtotx.slot_offset as u64;
        trace.push(rtotx, CallFlowEvent::RtoTxSent);
        let lbr = wait_until_idle(
            &mut trace,
            rtotx + rtorx_gap,
            &busy_at_mt,
            CallFlowEvent::LbrBusy,
            Some(CallFlowEvent::Deferred),
            CallFlowEvent::LbrIdle,
        )?;
        trace.push(lbr, CallFlowEvent::RtoRxSent);
        let data = wait_until_idle(
            &mut trace,
            lbr + data_gap,
            &busy_at_bs,
            CallFlowEvent::LbtBusy,
            None,
            CallFlowEvent::LbtIdle,
        )?;
        trace.push(data, CallFlowEvent::DataTxStart);
        next_free = data + 1;
    }
    Ok(trace)
}

/// Two DL arrivals without headers: the first finds the MT idle, the second
/// finds it busy for three slots and is deferred.
pub fn demo_call_flow() -> CallFlowTrace {
    let layout = build_slot_layout(LinkDirection::Downlink, false);
    simulate_call_flow(&[0, 4], |t| (4..7).contains(&t), |_| false, &layout)
        .expect("demo predicates clear")
}
