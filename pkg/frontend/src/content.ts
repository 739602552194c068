// Content script: mounts the sidebar container on page load and runs the
// indexed/unindexed branching. The extension never crawls; it only talks to
// the tosqa API and reads the current page's DOM.
import { TosQaClient } from "./api";
import { loadApiBaseUrl } from "./options";
import { SidebarController } from "./sidebar";

async function boot(): Promise<void> {
  const baseUrl = await loadApiBaseUrl();
  const client = new TosQaClient(baseUrl);

  let root = document.getElementById("tosqa-sidebar-root") as HTMLElement | null;
  if (!root) {
    root = document.createElement("div");
    root.id = "tosqa-sidebar-root";
    document.documentElement.appendChild(root);
  }

  const controller = new SidebarController(root, client);
  const mode = await controller.onPageLoad(document, window.location.href);
  console.debug(`tosqa sidebar mode: ${mode}`);

  if (typeof chrome !== "undefined" && chrome.runtime?.sendMessage) {
    chrome.runtime.sendMessage({ type: "TOSQA_MODE", mode }).catch(() => {
      // Service worker may be asleep; the badge is cosmetic.
    });
  }
}

void boot();
