/** Pure HTML rendering: model in, markup out. No DOM access here. */

import { AlertRow, DashboardModel, Panel } from "./model.js";

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function sparklineSvg(history: number[], width = 120, height = 28): string {
  if (history.length < 2) {
    return `<svg class="spark" width="${width}" height="${height}"></svg>`;
  }
  const lo = Math.min(...history);
  const hi = Math.max(...history);
  const span = hi - lo || 1;
  const step = width / (history.length - 1);
  const points = history
    .map((v, i) => `${(i * step).toFixed(1)},${(height - 2 - ((v - lo) / span) * (height - 4)).toFixed(1)}`)
    .join(" ");
  return `<svg class="spark" width="${width}" height="${height}"><polyline fill="none" points="${points}"/></svg>`;
}

const KIND_BY_UNIT: Record<string, string> = {
  C: "temperature",
  ppm: "gas",
  motion: "motion",
  Vrms: "water leak",
  on: "light",
};

export function kindLabel(unit: string): string {
  return KIND_BY_UNIT[unit] ?? "sensor";
}

export function formatValue(panel: Panel): string {
  if (panel.unit === "motion") {
    return panel.value >= 1 ? "MOTION" : "quiet";
  }
  if (panel.unit === "on") {
    return panel.value >= 1 ? "ON" : "OFF";
  }
  if (panel.unit === "C") {
    return `${panel.value.toFixed(0)} °C`;
  }
  if (panel.unit === "ppm") {
    return `${panel.value.toFixed(1)} ppm`;
  }
  return `${panel.value.toFixed(3)} ${panel.unit}`;
}

export function renderPanels(model: DashboardModel): string {
  const cards = [...model.panels.values()].map((panel) => {
    const light = model.lights.get(panel.device);
    const toggle = light
      ? `<button data-action="toggle-light" data-device="${esc(panel.device)}"` +
        `${light.pending ? " disabled" : ""}>turn ${light.state === "ON" ? "off" : "on"}</button>`
      : "";
    const badges =
      (panel.stale ? '<span class="badge stale">stale</span>' : "") +
      (light?.pending ? '<span class="badge pending">pending</span>' : "");
    return (
      `<div class="panel${panel.stale ? " is-stale" : ""}" data-panel="${esc(panel.device)}">` +
      `<h3>${esc(panel.device)} <span class="kind">${esc(kindLabel(panel.unit))}</span>${badges}</h3>` +
      `<div class="value">${esc(formatValue(panel))}</div>` +
      sparklineSvg(panel.history) +
      toggle +
      `</div>`
    );
  });
  return `<section class="panels">${cards.join("")}</section>`;
}

export function renderAlertRow(row: AlertRow): string {
  const { alert } = row;
  const ack =
    alert.state === "ACTIVE"
      ? `<button data-action="ack" data-id="${alert.id}">ack</button>`
      : "";
  return (
    `<tr class="alert-row state-${alert.state.toLowerCase()}" data-alert="${alert.id}">` +
    `<td>#${row.seq}</td><td>${esc(alert.kind)}</td><td>${esc(alert.device)}</td>` +
    `<td>${alert.raised_at} ms</td><td>${alert.state}${row.pendingAck ? "…" : ""}</td>` +
    `<td>${ack}</td></tr>`
  );
}

export function renderAlerts(model: DashboardModel): string {
  const rows = model.alertRows().map(renderAlertRow).join("");
  const body = rows || '<tr><td colspan="6" class="empty">no alerts</td></tr>';
  return (
    `<section class="alerts"><h2>Alerts (${model.activeAlertCount()} active)</h2>` +
    `<table><thead><tr><th>seq</th><th>kind</th><th>device</th><th>raised</th>` +
    `<th>state</th><th></th></tr></thead><tbody>${body}</tbody></table></section>`
  );
}

export function renderHeader(model: DashboardModel): string {
  const banner =
    model.connection === "reconnecting"
      ? '<div class="banner reconnecting">connection lost, reconnecting…</div>'
      : "";
  const error = model.lastError
    ? `<div class="banner error">${esc(model.lastError)}</div>`
    : "";
  const armed =
    model.mode === "AWAY" ? '<span class="badge armed">intrusion armed</span>' : "";
  const nextMode = model.mode === "AWAY" ? "home" : "away";
  return (
    `<header><h1>hearth</h1>` +
    `<span class="badge mode-${model.mode.toLowerCase()}">${model.mode}</span>${armed}` +
    `<button data-action="set-mode" data-mode="${nextMode}"${model.modePending ? " disabled" : ""}>` +
    `go ${nextMode}</button>` +
    `<span class="tick">t=${model.latestTick} ms</span>` +
    `</header>${banner}${error}`
  );
}

export function renderLogin(message: string): string {
  return (
    `<div class="login"><h1>hearth</h1><p>${esc(message)}</p>` +
    `<form data-action="login"><input type="password" name="token" placeholder="API token" autofocus>` +
    `<button type="submit">connect</button></form></div>`
  );
}

export function renderApp(model: DashboardModel): string {
  if (model.connection === "unauthorized") {
    return renderLogin("enter the gateway API token");
  }
  return renderHeader(model) + renderPanels(model) + renderAlerts(model);
}
