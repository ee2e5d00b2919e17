import { describe, expect, it } from "vitest";

import { ApiClient, ApiRequestError } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("ApiClient", () => {
  it("deduplicates concurrent requests for the same URL", async () => {
    let calls = 0;
    const client = new ApiClient("", async () => {
      calls++;
      await new Promise((resolve) => setTimeout(resolve, 5));
      return jsonResponse([]);
    });
    await Promise.all([client.categories(), client.categories(), client.categories()]);
    expect(calls).toBe(1);
    await client.categories(); // new request once the first settled
    expect(calls).toBe(2);
  });

  it("different URLs are not deduplicated", async () => {
    const urls: string[] = [];
    const client = new ApiClient("", async (input) => {
      urls.push(input);
      return jsonResponse([]);
    });
    await Promise.all([client.entities("MedicationName"), client.entities("Diagnosis")]);
    expect(urls).toHaveLength(2);
  });

  it("maps API error bodies to typed errors", async () => {
    const client = new ApiClient("", async () =>
      jsonResponse({ status: 400, code: "unknown_category", message: "unknown category 'X'" }, 400),
    );
    await expect(client.entities("X")).rejects.toThrowError(ApiRequestError);
    await client.entities("X").catch((err: ApiRequestError) => {
      expect(err.status).toBe(400);
      expect(err.code).toBe("unknown_category");
    });
  });

  it("stale responses are discarded by sequence number", () => {
    const client = new ApiClient("");
    const first = client.nextSequence();
    const second = client.nextSequence();
    // The newer response lands first; the older one must be dropped.
    expect(client.deliver("entities", second)).toBe(true);
    expect(client.deliver("entities", first)).toBe(false);
    // A fresh request supersedes both.
    const third = client.nextSequence();
    expect(client.deliver("entities", third)).toBe(true);
  });

  it("sequence slots are independent", () => {
    const client = new ApiClient("");
    const a = client.nextSequence();
    const b = client.nextSequence();
    expect(client.deliver("entities", b)).toBe(true);
    expect(client.deliver("categories", a)).toBe(true);
  });

  it("builds query strings with encoded parameters", async () => {
    const urls: string[] = [];
    const client = new ApiClient("http://api", async (input) => {
      urls.push(input);
      return jsonResponse({ term_key: "x", points: [], skipped: 0 });
    });
    await client.timeseries("text:400 mg");
    expect(urls[0]).toContain("/terms/text%3A400%20mg/timeseries");
  });

  it("posts SQL to /query and surfaces syntax errors", async () => {
    const client = new ApiClient("", async (input, init) =>
      init?.method === "POST"
        ? jsonResponse({ status: 400, code: "syntax_error", message: "bad", line: 1, column: 8 }, 400)
        : jsonResponse([]),
    );
    await expect(client.query("SELECT FROM papers p")).rejects.toMatchObject({
      code: "syntax_error",
    });
  });
});
