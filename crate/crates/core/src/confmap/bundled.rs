//! Fixtures compiled into the crate for the packaging-line scenario.

use super::{derive_config, match_signals, parse_ports, parse_profiles, MappingReport, ParameterSet, SignalReport};
use crate::semstore::KnowledgeBase;
use crate::units::ConverterRegistry;

pub const PACKAGING_KB: &str = include_str!("../../data/packaging.kb");
pub const PACKAGING_PRODUCT: &str = include_str!("../../data/packaging.product");
pub const PACKAGING_MACHINES: &str = include_str!("../../data/packaging.machines");
pub const CHARGING_KB: &str = include_str!("../../data/charging.kb");
pub const CHARGING_BLOCKS: &str = include_str!("../../data/charging.blocks");
pub const CHARGING_DEVICES: &str = include_str!("../../data/charging.devices");
pub const CONVERTERS: &str = include_str!("../../data/converters.tsv");

pub fn converters() -> ConverterRegistry {
    ConverterRegistry::parse(CONVERTERS).expect("bundled converters parse")
}

/// Parameter mapping for the three packaging machines.
pub fn packaging_line() -> MappingReport {
    let kb = KnowledgeBase::parse(PACKAGING_KB).expect("bundled kb parses");
    let product = ParameterSet::parse(PACKAGING_PRODUCT).expect("bundled product parses");
    let machines = parse_profiles(PACKAGING_MACHINES).expect("bundled profiles parse");
    derive_config(&product, &machines, &kb, &converters())
}

/// Signal wiring for the charging station.
pub fn charging_station() -> SignalReport {
    let kb = KnowledgeBase::parse(CHARGING_KB).expect("bundled kb parses");
    let blocks = parse_ports(CHARGING_BLOCKS).expect("bundled blocks parse");
    let devices = parse_ports(CHARGING_DEVICES).expect("bundled devices parse");
    match_signals(&blocks, &devices, &kb, &converters())
}
