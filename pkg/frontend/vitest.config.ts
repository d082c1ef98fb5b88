import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    globalSetup: "./test/setup.ts",
    testTimeout: 1_800_000,
    hookTimeout: 300_000,
    // training tests mutate shared tfjs state; keep everything in one worker
    pool: "threads",
    poolOptions: { threads: { singleThread: true } },
  },
});
