import { defineConfig } from "vitest/config";

// base "./" so the build works when mounted under /ui by the service
export default defineConfig({
  base: "./",
  build: { outDir: "dist" },
  server: {
    proxy: {
      // dev mode: forward API calls to a locally running service
      "^/(healthz|scenes|plans|overlay)": "http://127.0.0.1:8000",
    },
  },
  test: {
    environment: "node",
    include: ["test/**/*.test.ts"],
  },
});
