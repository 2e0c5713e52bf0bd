// Overview view contract: the report text, heatmap, and failure rows are
// rendered verbatim from a recorded engine envelope.

import { beforeEach, describe, expect, it } from "vitest";

import { renderOverview } from "../src/views/overview.js";
import type { Envelope, OverviewData } from "../src/types.js";
import fixture from "./fixtures/overview.json";

const envelope = fixture as unknown as Envelope<OverviewData>;

describe("overview view", () => {
  let host: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = "<div id='host'></div>";
    host = document.getElementById("host")!;
  });

  it("renders the generated report text verbatim", () => {
    renderOverview(host, envelope);
    const report = host.querySelector("[data-role='report']")!;
    expect(report.textContent).toBe(envelope.data.report);
  });

  it("renders the status heatmap with one row per config and one column per budget", () => {
    renderOverview(host, envelope);
    const matrix = host.querySelector("[data-role='status-matrix']")!;
    const rows = matrix.querySelectorAll("tbody tr");
    expect(rows.length).toBe(envelope.data.matrix.config_ids.length);
    const headers = matrix.querySelectorAll("thead th");
    expect(headers.length).toBe(envelope.data.matrix.budgets.length + 1);
    envelope.data.matrix.budgets.forEach((budget, i) => {
      expect(headers[i + 1].textContent).toBe(String(budget));
    });
    const firstRowCells = rows[0].querySelectorAll("td");
    envelope.data.matrix.status[0].forEach((status, j) => {
      expect(firstRowCells[j].getAttribute("title")).toBe(status);
    });
  });

  it("lists failures with traceback details", () => {
    renderOverview(host, envelope);
    const failures = envelope.data.failures;
    expect(failures.length).toBeGreaterThan(0);
    const table = host.querySelector(".failures-table")!;
    const rows = table.querySelectorAll("tbody tr");
    expect(rows.length).toBe(failures.length);
    const first = rows[0].querySelectorAll("td");
    expect(first[0].textContent).toBe(String(failures[0].config_id));
    expect(first[1].textContent).toBe(String(failures[0].budget));
    expect(first[2].textContent).toBe(failures[0].status);
    const withTrace = failures.findIndex((f) => f.traceback !== null);
    const pre = rows[withTrace].querySelector("pre");
    expect(pre?.textContent).toBe(failures[withTrace].traceback);
  });

  it("shows trial counts bit-identical to the envelope", () => {
    renderOverview(host, envelope);
    const counts = host.querySelector(".counts-table")!;
    for (const row of counts.querySelectorAll("tbody tr")) {
      const [status, count] = row.querySelectorAll("td");
      expect(count.textContent).toBe(String(envelope.data.counts[status.textContent!]));
    }
  });
});
