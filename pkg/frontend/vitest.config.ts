import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    // the fixture hook shells out to the analysis CLI for every CSV
    hookTimeout: 300_000,
    testTimeout: 120_000,
  },
});
