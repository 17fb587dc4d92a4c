import { initApp } from "./app";

const root = document.getElementById("app");
if (root) {
  // Served by the review service itself: same origin, no base URL needed.
  void initApp(root, { baseUrl: "" });
}
