// Minimal typing for the extension runtime; the full @types/chrome package
// is unnecessary for the handful of APIs used here.
declare const chrome: {
  runtime: {
    onMessage: {
      addListener(
        callback: (message: any, sender: any, sendResponse: (response?: any) => void) => void | boolean,
      ): void;
    };
    sendMessage(message: any): Promise<any>;
  };
  storage: {
    sync: {
      get(defaults: Record<string, any>): Promise<Record<string, any>>;
      set(items: Record<string, any>): Promise<void>;
    };
  };
  action: {
    setBadgeText(details: { text: string; tabId?: number }): void;
  };
  tabs: {
    onUpdated: {
      addListener(
        callback: (tabId: number, changeInfo: any, tab: any) => void,
      ): void;
    };
  };
};
