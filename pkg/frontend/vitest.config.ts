import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    globals: true,
    include: ["tests/**/*.test.ts"],
    testTimeout: 45000,
    hookTimeout: 20000,
    fileParallelism: false,
  },
});
