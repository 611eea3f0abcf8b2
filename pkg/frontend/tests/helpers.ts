import fs from "node:fs";
import path from "node:path";
import { fileURLToPath } from "node:url";
import type { FetchLike } from "../src/api.js";

const FIXTURES_DIR = path.join(path.dirname(fileURLToPath(import.meta.url)), "..", "fixtures");

export interface Fixture {
  path: string;
  query: Record<string, string>;
  status: number;
  body: unknown;
}

export function loadFixture(name: string): Fixture {
  const raw = fs.readFileSync(path.join(FIXTURES_DIR, `${name}.json`), "utf8");
  return JSON.parse(raw) as Fixture;
}

export function allFixtures(): Fixture[] {
  return fs
    .readdirSync(FIXTURES_DIR)
    .filter((name) => name.endsWith(".json"))
    .map((name) => loadFixture(name.slice(0, -".json".length)));
}

function requestKey(pathname: string, params: Iterable<[string, string]>): string {
  const sorted = [...params].sort(([a], [b]) => a.localeCompare(b));
  return `${pathname}?${sorted.map(([k, v]) => `${k}=${v}`).join("&")}`;
}

export interface LoggedRequest {
  path: string;
  key: string;
}

/**
 * Fixture-backed FetchLike. Requests are matched on pathname plus the sorted
 * query string; anything unmatched gets a 404 envelope, which exercises the
 * dashboard's error path the same way a live server would.
 */
export class MockApi {
  readonly log: LoggedRequest[] = [];
  private readonly table = new Map<string, Fixture>();

  constructor(fixtures: Fixture[] = allFixtures()) {
    for (const fixture of fixtures) {
      this.table.set(requestKey(fixture.path, Object.entries(fixture.query)), fixture);
    }
  }

  readonly fetchImpl: FetchLike = (url) => {
    const parsed = new URL(url);
    const key = requestKey(parsed.pathname, parsed.searchParams.entries());
    this.log.push({ path: parsed.pathname, key });
    const fixture = this.table.get(key);
    if (!fixture) {
      return Promise.resolve({
        status: 404,
        json: async () => ({ code: "no_fixture", message: `no fixture for ${key}` }),
      });
    }
    return Promise.resolve({
      status: fixture.status,
      json: async () => structuredClone(fixture.body),
    });
  };

  loggedPaths(): string[] {
    return this.log.map((entry) => entry.path);
  }
}

/** Let chained promise callbacks settle. */
export async function settle(rounds = 6): Promise<void> {
  for (let i = 0; i < rounds; i++) {
    await new Promise<void>((resolve) => setTimeout(resolve, 0));
  }
}
