/**
 * The five figure kinds rendered from a completed compare run:
 *   trace       per-motor efficiency estimates vs truth over time
 *   bars        per-motor RMSE with std error bars, both methods
 *   spikes      per-motor maximum estimation spikes, both methods
 *   convergence efficiency iterates over one interior-point loop
 *   kkt         dual/centrality residuals and surrogate gap, log scale
 */

import { existsSync } from "fs";
import { join } from "path";
import { SchemaError, loadTable, numeric, strings, Table } from "./csv.js";
import { BarGroup, barPanel, compose, linePanel, Series } from "./svg.js";

export const KINDS = ["trace", "bars", "spikes", "convergence", "kkt"] as const;
export type Kind = (typeof KINDS)[number];

const IRLS_COLOR = "#1665c0";
const EKF_COLOR = "#e2711d";
const TRUTH_COLOR = "#444444";
const MOTOR_COLORS = ["#1665c0", "#e2711d", "#2e8540", "#b3003c"];

function etaColumns(table: Table): number[][] {
  return [1, 2, 3, 4].map((i) => numeric(table, `eta${i}`));
}

export function renderTrace(dir: string): string {
  const est = loadTable(join(dir, "estimates.csv"), "estimates");
  const truth = loadTable(join(dir, "truth.csv"), "truth");
  const ekf = loadTable(join(dir, "ekf.csv"), "ekf");
  const tEst = numeric(est, "t");
  const tTruth = numeric(truth, "t");
  const tEkf = numeric(ekf, "t");
  const eEst = etaColumns(est);
  const eTruth = etaColumns(truth);
  const eEkf = etaColumns(ekf);
  const panels = [0, 1, 2, 3].map((m) => {
    const series: Series[] = [
      { label: "truth", x: tTruth, y: eTruth[m], color: TRUTH_COLOR, dash: "5,3", width: 1.2 },
      { label: "sliding-window", x: tEst, y: eEst[m], color: IRLS_COLOR },
    ];
    if (tEkf.length > 0) {
      series.push({ label: "ekf", x: tEkf, y: eEkf[m], color: EKF_COLOR });
    }
    return linePanel(series, {
      title: `motor ${m + 1}`,
      xLabel: "time [s]",
      yLabel: "efficiency",
    });
  });
  return compose(panels, 2);
}

function metricsTable(dir: string): Table {
  const comparePath = join(dir, "metrics_compare.csv");
  if (existsSync(comparePath)) return loadTable(comparePath, "metrics_compare");
  return loadTable(join(dir, "metrics.csv"), "metrics");
}

function metricGroups(table: Table, valueCol: string, errorCol?: string): { groups: BarGroup[]; labels: string[] } {
  const methods = strings(table, "method");
  const motors = numeric(table, "motor");
  const values = numeric(table, valueCol);
  const errors = errorCol ? numeric(table, errorCol) : undefined;
  const labels = [...new Set(methods)];
  const groups: BarGroup[] = [1, 2, 3, 4].map((m) => {
    const vals: number[] = [];
    const errs: number[] = [];
    for (const method of labels) {
      const idx = methods.findIndex((mm, i) => mm === method && motors[i] === m);
      if (idx < 0) throw new SchemaError(`metrics: no row for method '${method}' motor ${m}`);
      vals.push(values[idx]);
      if (errors) errs.push(errors[idx]);
    }
    return { label: `motor ${m}`, values: vals, errors: errors ? errs : undefined };
  });
  return { groups, labels };
}

export function renderBars(dir: string): string {
  const table = metricsTable(dir);
  const { groups, labels } = metricGroups(table, "rmse", "std");
  const colors = labels.map((m) => (m === "ekf" ? EKF_COLOR : IRLS_COLOR));
  return compose(
    [barPanel(groups, labels, colors, { title: "estimation rmse (bars) and std (whiskers)", xLabel: "", yLabel: "rmse" })],
    1,
  );
}

export function renderSpikes(dir: string): string {
  const table = metricsTable(dir);
  const { groups, labels } = metricGroups(table, "max_spike");
  const colors = labels.map((m) => (m === "ekf" ? EKF_COLOR : IRLS_COLOR));
  return compose(
    [barPanel(groups, labels, colors, { title: "maximum estimation spike per motor", xLabel: "", yLabel: "max |error|" })],
    1,
  );
}

export function renderConvergence(dir: string): string {
  const table = loadTable(join(dir, "iterates.csv"), "iterates");
  const irls = numeric(table, "irls_iter");
  const newton = numeric(table, "newton_iter");
  const etas = etaColumns(table);
  const sel = irls.map((v) => v === 1);
  if (!sel.some(Boolean)) throw new SchemaError("iterates.csv: no rows for the first interior-point loop");
  const x = newton.filter((_, i) => sel[i]);
  const series: Series[] = etas.map((col, m) => ({
    label: `motor ${m + 1}`,
    x,
    y: col.filter((_, i) => sel[i]),
    color: MOTOR_COLORS[m],
  }));
  return compose(
    [linePanel(series, { title: "efficiency iterates, one interior-point loop", xLabel: "newton iteration", yLabel: "efficiency" })],
    1,
  );
}

export function renderKkt(dir: string): string {
  const table = loadTable(join(dir, "kkt_trace.csv"), "kkt_trace");
  const win = numeric(table, "window");
  const irls = numeric(table, "irls_iter");
  const newton = numeric(table, "newton_iter");
  const sel = win.map((w, i) => w === 0 && irls[i] === 1);
  if (!sel.some(Boolean)) throw new SchemaError("kkt_trace.csv: no rows for window 0, irls iteration 1");
  const x = newton.filter((_, i) => sel[i]);
  const pick = (col: string) => numeric(table, col).filter((_, i) => sel[i]);
  const series: Series[] = [
    { label: "dual residual", x, y: pick("r_dual_norm"), color: IRLS_COLOR },
    { label: "centrality residual", x, y: pick("r_cent_norm"), color: EKF_COLOR },
    { label: "surrogate gap", x, y: pick("gap"), color: "#2e8540" },
  ];
  return compose(
    [linePanel(series, { title: "kkt convergence, one interior-point loop", xLabel: "newton iteration", yLabel: "residual / gap", logY: true })],
    1,
  );
}

export function render(kind: Kind, dir: string): string {
  switch (kind) {
    case "trace":
      return renderTrace(dir);
    case "bars":
      return renderBars(dir);
    case "spikes":
      return renderSpikes(dir);
    case "convergence":
      return renderConvergence(dir);
    case "kkt":
      return renderKkt(dir);
  }
}
