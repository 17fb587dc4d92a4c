// @vitest-environment jsdom
import { describe, expect, it } from "vitest";

import { renderProgress } from "../src/progress";
import { StubService, ndFixture } from "./stub_service";

describe("renderProgress", () => {
  it("shows a placeholder before any reviews", () => {
    const panel = document.createElement("div");
    renderProgress(panel, null);
    expect(panel.textContent).toContain("no reviews yet");
    expect(panel.dataset.raw).toBeUndefined();
  });

  it("is a byte-exact pass-through of the service payload", () => {
    const stub = new StubService(ndFixture());
    stub.log.push({
      issue: "ND",
      subjectKey: "dup0a|dup0b",
      decision: "confirm",
      reviewer: "t",
      seq: 1,
    });
    const payload = stub.progressPayload();
    const panel = document.createElement("div");
    renderProgress(panel, payload);
    expect(panel.dataset.raw).toBe(JSON.stringify(payload));
    const cells = [...panel.querySelectorAll("td")].map((td) => td.textContent);
    expect(cells).toEqual(["ND", "1", "1", String(payload.issues.ND.foe_so_far)]);
  });
});
