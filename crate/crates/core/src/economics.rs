//! Equipment, investment and utility costs of a single column, plus product
//! revenue.
//!
//! Money is in euro for the individual equipment items and in million euro
//! (per year where annualized) everywhere else.

use serde::{Deserialize, Serialize};

use crate::column::ColumnSizing;
use crate::stream::Stream;

/// Cost-model constants. Everything except `hetp`, `f_cap` and `uptime` is
/// a fixed correlation constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostFactors {
    /// Marshall & Swift equipment index, 2018.
    pub ms2018: f64,
    /// Lang factor.
    pub lang_f_l: f64,
    /// Column shell material correction.
    pub f_m: f64,
    /// Column pressure correction.
    pub f_p: f64,
    /// Tray spacing correction.
    pub f_int_s: f64,
    /// Tray type correction.
    pub f_int_t: f64,
    /// Internals material correction.
    pub f_int_m: f64,
    /// Heat exchanger pressure correction.
    pub f_htx_p: f64,
    /// Heat exchanger design type (fixed tube sheet).
    pub f_htx_d: f64,
    /// Heat exchanger material correction.
    pub f_htx_m: f64,
    /// Condenser heat transfer coefficient, W/(m2 degC).
    pub k_cnd: f64,
    /// Reboiler heat transfer coefficient, W/(m2 degC).
    pub k_rbl: f64,
    /// Cooling water supply temperature, degC.
    pub t_cool_in: f64,
    /// Cooling water return temperature, degC.
    pub t_cool_out: f64,
    /// Steam temperature, degC.
    pub t_steam: f64,
    /// Steam price at 16 bar, euro/ton.
    pub steam_price: f64,
    /// Molar mass of water, g/mol.
    pub m_water: f64,
    /// Heat of vaporization of 16 bar steam, J/mol.
    pub dh_vap_steam: f64,
    /// Gas load factor, Pa^0.5.
    pub gas_load_f: f64,
    /// Clearance height, m.
    pub h0: f64,
    /// Height equivalent to a theoretical plate, m.
    pub hetp: f64,
    /// Capital charge factor, 1/yr.
    pub f_cap: f64,
    /// Operating hours per year.
    pub uptime: f64,
}

impl Default for CostFactors {
    fn default() -> Self {
        Self {
            ms2018: 1638.2,
            lang_f_l: 5.0,
            f_m: 1.0,
            f_p: 1.0,
            f_int_s: 1.4,
            f_int_t: 0.0,
            f_int_m: 0.0,
            f_htx_p: 0.0,
            f_htx_d: 0.8,
            f_htx_m: 1.0,
            k_cnd: 500.0,
            k_rbl: 800.0,
            t_cool_in: 30.0,
            t_cool_out: 40.0,
            t_steam: 201.0,
            steam_price: 18.0,
            m_water: 18.0,
            dh_vap_steam: 34794.0,
            gas_load_f: 1.6,
            h0: 4.0,
            hetp: 0.6,
            f_cap: 0.333,
            uptime: 8000.0,
        }
    }
}

impl CostFactors {
    /// `F_c,col = F_m + F_p`
    pub fn column_correction(&self) -> f64 {
        self.f_m + self.f_p
    }

    /// `F_c,int = F_int,s + F_int,t + F_int,m`
    pub fn internals_correction(&self) -> f64 {
        self.f_int_s + self.f_int_t + self.f_int_m
    }

    /// `F_c = (F_htx,P + F_htx,d) * F_htx,m`, shared by condenser and reboiler.
    pub fn exchanger_correction(&self) -> f64 {
        (self.f_htx_p + self.f_htx_d) * self.f_htx_m
    }

    /// Electricity-equivalent price of cooling, euro/kWh, evaluated at the
    /// cooling water supply temperature.
    pub fn cooling_energy_price(&self) -> f64 {
        let t = self.t_cool_in;
        6e-6 * t * t - 0.0006 * t + 0.0163
    }
}

/// Product prices per component (euro/kmol) and the sales purity spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceTable {
    pub prices: Vec<f64>,
    pub purity_spec: f64,
}

impl PriceTable {
    pub fn new(prices: Vec<f64>, purity_spec: f64) -> Self {
        Self {
            prices,
            purity_spec,
        }
    }
}

/// Capital part of the cost breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CapitalCost {
    /// euro
    pub c_col: f64,
    /// euro
    pub c_int: f64,
    /// euro
    pub c_cnd: f64,
    /// euro
    pub c_rbl: f64,
    /// M euro
    pub c_eqp: f64,
    /// M euro
    pub c_inv: f64,
    /// Annualized investment `F_cap * C_inv`, M euro/yr.
    pub investment: f64,
}

/// Utility costs, M euro/yr.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OperatingCost {
    pub op_cnd: f64,
    pub op_rbl: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostReport {
    pub capital: CapitalCost,
    pub operating: OperatingCost,
    /// M euro/yr
    pub tac: f64,
}

/// Bare-module cost shared by every item: `0.9 * Ms * base / 280`.
fn scaled(f: &CostFactors, base: f64) -> f64 {
    0.9 * f.ms2018 * base / 280.0
}

pub fn column_cost(diameter: f64, height: f64, f: &CostFactors) -> f64 {
    scaled(
        f,
        937.64 * diameter.powf(1.066) * height.powf(0.802) * f.column_correction(),
    )
}

pub fn internals_cost(diameter: f64, height: f64, f: &CostFactors) -> f64 {
    scaled(
        f,
        97.24 * diameter.powf(1.55) * height * f.internals_correction(),
    )
}

/// Condenser or reboiler cost from its area, euro.
pub fn exchanger_cost(area: f64, f: &CostFactors) -> f64 {
    scaled(f, 474.67 * area.powf(0.65) * f.exchanger_correction())
}

pub fn equipment_cost(sz: &ColumnSizing, f: &CostFactors) -> CapitalCost {
    let c_col = column_cost(sz.diameter, sz.height, f);
    let c_int = internals_cost(sz.diameter, sz.height, f);
    let c_cnd = exchanger_cost(sz.area_cnd, f);
    let c_rbl = exchanger_cost(sz.area_rbl, f);
    let c_eqp = (c_col + c_int + c_cnd + c_rbl) / 1_000_000.0;
    let c_inv = f.lang_f_l * c_eqp;
    CapitalCost {
        c_col,
        c_int,
        c_cnd,
        c_rbl,
        c_eqp,
        c_inv,
        investment: f.f_cap * c_inv,
    }
}

/// Condenser cooling and reboiler steam costs from duties in W.
///
/// Duties enter by magnitude: the condenser duty is negative by convention.
pub fn operating_cost(q_cnd: f64, q_rbl: f64, f: &CostFactors) -> OperatingCost {
    let e_cnd = f.uptime * q_cnd.abs() / 1000.0; // kWh/yr
    let op_cnd = e_cnd * f.cooling_energy_price() / 1_000_000.0;
    // euro/yr: mol/s of steam * g/mol * euro/ton * s/h * h/yr, with 1e6 g/ton
    let steam_eur = q_rbl.abs() * f.m_water * f.steam_price * 3600.0 * f.uptime
        / (f.dh_vap_steam * 1_000_000.0);
    OperatingCost {
        op_cnd,
        op_rbl: steam_eur / 1_000_000.0,
    }
}

/// `TAC = F_cap * C_inv + op_cnd + op_rbl`, M euro/yr.
pub fn tac(capital: &CapitalCost, operating: &OperatingCost) -> f64 {
    capital.investment + operating.op_cnd + operating.op_rbl
}

pub fn cost_report(sz: &ColumnSizing, q_cnd: f64, q_rbl: f64, f: &CostFactors) -> CostReport {
    let capital = equipment_cost(sz, f);
    let operating = operating_cost(q_cnd, q_rbl, f);
    CostReport {
        capital,
        operating,
        tac: tac(&capital, &operating),
    }
}

/// Annual sales of `stream`, M euro/yr. Only on-spec streams sell, at the
/// price of their dominant component.
pub fn revenue(stream: &Stream, prices: &PriceTable, uptime: f64) -> f64 {
    if !(stream.flow > 0.0) {
        return 0.0;
    }
    let (i, purity) = stream.purity();
    if purity >= prices.purity_spec {
        stream.flow * prices.prices[i] * uptime / 1_000_000.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sizing(d: f64, l: f64, a_cnd: f64, a_rbl: f64) -> ColumnSizing {
        ColumnSizing {
            diameter: d,
            height: l,
            area_cnd: a_cnd,
            area_rbl: a_rbl,
            dtlm_cnd: 10.0,
            dtlm_rbl: 100.0,
            t_cnd: 50.0,
            t_rbl: 100.0,
        }
    }

    #[test]
    fn column_cost_example() {
        let f = CostFactors::default();
        assert_eq!(f.column_correction(), 2.0);
        let c = column_cost(5.0, 50.0, &f) / 1e6;
        assert!((c - 1.27).abs() < 0.01, "C_col = {c} M euro");
    }

    #[test]
    fn exchanger_correction_and_zero_area() {
        let f = CostFactors::default();
        assert!((f.exchanger_correction() - 0.8).abs() < 1e-15);
        assert_eq!(exchanger_cost(0.0, &f), 0.0);
    }

    #[test]
    fn cooling_price_at_supply_temperature() {
        let f = CostFactors::default();
        assert!((f.cooling_energy_price() - 0.0037).abs() < 1e-12);
    }

    #[test]
    fn steam_cost_for_one_megawatt() {
        let f = CostFactors::default();
        let op = operating_cost(0.0, 1e6, &f);
        assert_eq!(op.op_cnd, 0.0);
        assert!((op.op_rbl - 0.268).abs() < 5e-4, "{}", op.op_rbl);
        assert_eq!(operating_cost(-1e6, 0.0, &f).op_rbl, 0.0);
    }

    #[test]
    fn tac_assembly() {
        let mut f = CostFactors::default();
        let zero = cost_report(&sizing(0.0, 0.0, 0.0, 0.0), 0.0, 0.0, &f);
        assert_eq!(zero.tac, 0.0);
        f.f_cap = 1.0;
        let cap = equipment_cost(&sizing(4.0, 30.0, 1000.0, 800.0), &f);
        assert_eq!(tac(&cap, &OperatingCost::default()), cap.c_inv);
        assert_eq!(cap.c_inv, 5.0 * cap.c_eqp);
    }

    #[test]
    fn homogeneity() {
        let f = CostFactors::default();
        let k: f64 = 2.7;
        let r = exchanger_cost(300.0 * k, &f) / exchanger_cost(300.0, &f);
        assert!((r / k.powf(0.65) - 1.0).abs() < 1e-12);
        let r = column_cost(3.0 * k, 40.0, &f) / column_cost(3.0, 40.0, &f);
        assert!((r / k.powf(1.066) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn revenue_threshold() {
        let prices = PriceTable::new(vec![10.0, 20.0], 0.95);
        let s = |x: f64, flow: f64| Stream::new(vec![x, 1.0 - x], flow, 20.0, 1.0);
        assert_eq!(revenue(&s(0.949, 100.0), &prices, 8000.0), 0.0);
        assert!(revenue(&s(0.95, 100.0), &prices, 8000.0) > 0.0);
        assert_eq!(revenue(&s(1.0, 0.0), &prices, 8000.0), 0.0);
        // dominant component 1 at 96 %
        let r = revenue(&s(0.04, 100.0), &prices, 8000.0);
        assert!((r - 100.0 * 20.0 * 8000.0 / 1e6).abs() < 1e-12);
    }
}
