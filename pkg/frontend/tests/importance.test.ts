// Importance view contract: bars labeled bit-identically to the envelope
// and a working method toggle between fanova and lpi.

import { beforeEach, describe, expect, it } from "vitest";

import { renderImportance } from "../src/views/importance.js";
import type { Envelope, ImportanceData } from "../src/types.js";
import fanovaFixture from "./fixtures/importance.json";
import lpiFixture from "./fixtures/importance_lpi.json";

const fanovaEnv = fanovaFixture as unknown as Envelope<ImportanceData>;
const lpiEnv = lpiFixture as unknown as Envelope<ImportanceData>;

describe("importance view", () => {
  let host: HTMLElement;

  beforeEach(() => {
    document.body.innerHTML = "<div id='host'></div>";
    host = document.getElementById("host")!;
  });

  it("renders one bar per score with mean ± std verbatim", () => {
    renderImportance(host, fanovaEnv, { onMethodChange: () => {} });
    const rows = host.querySelectorAll(".bar-row");
    expect(rows.length).toBe(fanovaEnv.data.scores.length);
    rows.forEach((row, i) => {
      const score = fanovaEnv.data.scores[i];
      expect(row.getAttribute("data-name")).toBe(score.name);
      expect(row.querySelector(".bar-label")!.textContent).toBe(score.name);
      expect(row.querySelector(".bar-value")!.textContent).toBe(
        `${String(score.mean)} ± ${String(score.std)}`,
      );
    });
  });

  it("method toggle requests the other analysis", () => {
    const changes: string[] = [];
    renderImportance(host, fanovaEnv, { onMethodChange: (m) => changes.push(m) });
    const toggle = host.querySelector("[data-role='method-toggle']") as HTMLSelectElement;
    expect(toggle.value).toBe("fanova");
    toggle.value = "lpi";
    toggle.dispatchEvent(new Event("change"));
    expect(changes).toEqual(["lpi"]);
  });

  it("renders the lpi envelope with its method preselected", () => {
    renderImportance(host, lpiEnv, { onMethodChange: () => {} });
    const toggle = host.querySelector("[data-role='method-toggle']") as HTMLSelectElement;
    expect(toggle.value).toBe("lpi");
    expect(host.querySelectorAll(".bar-row").length).toBe(lpiEnv.data.scores.length);
  });

  it("identical envelopes render identical bars (determinism pass-through)", () => {
    renderImportance(host, fanovaEnv, { onMethodChange: () => {} });
    const first = host.innerHTML;
    renderImportance(host, fanovaEnv, { onMethodChange: () => {} });
    expect(host.innerHTML).toBe(first);
  });
});
