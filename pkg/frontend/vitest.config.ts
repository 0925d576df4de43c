import { defineConfig } from "vitest/config";

export default defineConfig({
    test: {
        include: ["test/**/*.test.ts"],
        // the e2e test boots the debug server and a real proof run
        testTimeout: 120_000,
        hookTimeout: 120_000,
    },
});
